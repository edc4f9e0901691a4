#pragma once

// Series and window encodings.
//
// Raw series: 16-byte header then rows*length little-endian f32, row-major.
//   0  "SRSM"   4  u16 version   6  u32 rows   10  u32 length   14  2 zero bytes
// Raw windows: 20-byte header then one record per window.
//   0  "SRSW"   4  u16 version   6  u16 zero   8  u32 count   12  u32 context   16  u32 horizon
//   record: i32 pad_len, context f32 values, target f32 values
// CSV holds one series per line; JSONL one object per series or window.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sarsim/pipeline.hpp"

namespace sarsim {

enum class OutputFormat { csv, jsonl, raw };

const char* to_string(OutputFormat format) noexcept;
OutputFormat output_format_from_string(const std::string& name);

inline constexpr std::uint16_t kRawVersion = 1;
inline constexpr std::size_t kSeriesHeaderBytes = 16;
inline constexpr std::size_t kWindowHeaderBytes = 20;

/// Incremental writer; the raw header is written up front from `total_rows`.
class SeriesWriter {
  public:
    SeriesWriter(std::ostream& out, OutputFormat format, std::size_t total_rows, std::size_t length);

    void write(const FloatMatrix& batch, std::uint64_t batch_index);
    /// Throws IoError unless exactly total_rows rows were written.
    void finish();

  private:
    std::ostream& out_;
    OutputFormat format_;
    std::size_t total_rows_;
    std::size_t length_;
    std::size_t written_ = 0;
    std::string line_;
};

class WindowWriter {
  public:
    /// csv is not supported for windows.
    WindowWriter(std::ostream& out, OutputFormat format, std::size_t total, std::size_t context, std::size_t horizon);

    void write(const TrainingWindow& window, std::uint64_t batch_index, std::size_t row);
    void finish();

  private:
    std::ostream& out_;
    OutputFormat format_;
    std::size_t total_;
    std::size_t context_;
    std::size_t horizon_;
    std::size_t written_ = 0;
    std::string line_;
    std::vector<float> buffer_;
};

struct SeriesFile {
    OutputFormat format = OutputFormat::raw;
    std::size_t rows = 0;
    std::size_t length = 0;
    std::vector<float> data;  ///< row-major
};

struct WindowFile {
    OutputFormat format = OutputFormat::raw;
    std::size_t count = 0;
    std::size_t context = 0;
    std::size_t horizon = 0;
    std::vector<std::int32_t> pad_len;
    std::vector<float> contexts;  ///< count x context
    std::vector<float> targets;   ///< count x horizon
};

/// Format is detected from the content. Throws IoError on malformed input.
SeriesFile read_series(std::istream& in);
SeriesFile read_series_file(const std::string& path);
WindowFile read_windows(std::istream& in);
WindowFile read_windows_file(const std::string& path);

}  // namespace sarsim
