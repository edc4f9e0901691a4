#include "sarsim/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "sarsim/errors.hpp"

namespace sarsim {

const char* to_string(OutputFormat format) noexcept {
    switch (format) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::jsonl: return "jsonl";
        case OutputFormat::raw: return "raw";
    }
    return "raw";
}

OutputFormat output_format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "jsonl") return OutputFormat::jsonl;
    if (name == "raw") return OutputFormat::raw;
    throw ParameterError("unknown output format: " + name + " (expected csv, jsonl or raw)");
}

namespace {

constexpr char kSeriesMagic[4] = {'S', 'R', 'S', 'M'};
constexpr char kWindowMagic[4] = {'S', 'R', 'S', 'W'};

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffULL) throw IoError(std::string(what) + " does not fit the raw header");
    return static_cast<std::uint32_t>(v);
}

void write_f32le(std::ostream& out, const float* values, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values), static_cast<std::streamsize>(n * sizeof(float)));
    } else {
        std::string buf;
        buf.reserve(n * 4);
        for (std::size_t i = 0; i < n; ++i) put_u32(buf, std::bit_cast<std::uint32_t>(values[i]));
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
}

void read_f32le(const unsigned char* p, float* dst, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(dst, p, n * sizeof(float));
    } else {
        for (std::size_t i = 0; i < n; ++i) dst[i] = std::bit_cast<float>(get_u32(p + 4 * i));
    }
}

void append_float(std::string& line, float v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, res.ptr);
}

void append_values(std::string& line, const float* values, std::size_t n, char sep) {
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) line.push_back(sep);
        append_float(line, values[i]);
    }
}

void check_stream(const std::ostream& out) {
    if (!out) throw IoError("write failed");
}

// Parses a sep-separated float list from [first, last).
std::vector<float> parse_floats(const char* first, const char* last, char sep, const std::string& where) {
    std::vector<float> out;
    const char* p = first;
    while (p < last) {
        while (p < last && *p == ' ') ++p;
        float v = 0.0f;
        const auto res = std::from_chars(p, last, v);
        if (res.ec != std::errc()) throw IoError(where + ": malformed number");
        out.push_back(v);
        p = res.ptr;
        while (p < last && *p == ' ') ++p;
        if (p == last) break;
        if (*p != sep) throw IoError(where + ": unexpected character in value list");
        ++p;
    }
    return out;
}

// Finds "key":[ ... ] in a JSON line and parses the array without a detour
// through double, so decoded floats match the written ones exactly.
std::vector<float> json_float_array(const std::string& line, const std::string& key, const std::string& where) {
    const std::string tag = "\"" + key + "\":[";
    const auto start = line.find(tag);
    if (start == std::string::npos) throw IoError(where + ": missing array " + key);
    const auto open = start + tag.size();
    const auto close = line.find(']', open);
    if (close == std::string::npos) throw IoError(where + ": unterminated array " + key);
    return parse_floats(line.data() + open, line.data() + close, ',', where);
}

long long json_int(const std::string& line, const std::string& key, const std::string& where) {
    const std::string tag = "\"" + key + "\":";
    const auto start = line.find(tag);
    if (start == std::string::npos) throw IoError(where + ": missing field " + key);
    long long v = 0;
    const char* p = line.data() + start + tag.size();
    const auto res = std::from_chars(p, line.data() + line.size(), v);
    if (res.ec != std::errc()) throw IoError(where + ": malformed integer " + key);
    return v;
}

std::string slurp(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace

SeriesWriter::SeriesWriter(std::ostream& out, OutputFormat format, std::size_t total_rows, std::size_t length)
    : out_(out), format_(format), total_rows_(total_rows), length_(length) {
    if (format_ == OutputFormat::raw) {
        std::string header(kSeriesMagic, 4);
        put_u16(header, kRawVersion);
        put_u32(header, checked_u32(total_rows, "row count"));
        put_u32(header, checked_u32(length, "series length"));
        put_u16(header, 0);
        out_.write(header.data(), static_cast<std::streamsize>(header.size()));
        check_stream(out_);
    }
}

void SeriesWriter::write(const FloatMatrix& batch, std::uint64_t batch_index) {
    if (batch.cols != length_) throw IoError("series writer: batch length differs from the declared length");
    if (written_ + batch.rows > total_rows_) throw IoError("series writer: more rows than declared");
    switch (format_) {
        case OutputFormat::raw: write_f32le(out_, batch.data.data(), batch.rows * batch.cols); break;
        case OutputFormat::csv:
            for (std::size_t b = 0; b < batch.rows; ++b) {
                line_.clear();
                append_values(line_, batch.data.data() + b * batch.cols, batch.cols, ',');
                line_.push_back('\n');
                out_.write(line_.data(), static_cast<std::streamsize>(line_.size()));
            }
            break;
        case OutputFormat::jsonl:
            for (std::size_t b = 0; b < batch.rows; ++b) {
                line_ = "{\"batch\":" + std::to_string(batch_index) + ",\"row\":" + std::to_string(b) + ",\"values\":[";
                append_values(line_, batch.data.data() + b * batch.cols, batch.cols, ',');
                line_ += "]}\n";
                out_.write(line_.data(), static_cast<std::streamsize>(line_.size()));
            }
            break;
    }
    written_ += batch.rows;
    check_stream(out_);
}

void SeriesWriter::finish() {
    if (written_ != total_rows_) throw IoError("series writer: fewer rows written than declared");
    out_.flush();
    check_stream(out_);
}

WindowWriter::WindowWriter(std::ostream& out, OutputFormat format, std::size_t total, std::size_t context,
                           std::size_t horizon)
    : out_(out), format_(format), total_(total), context_(context), horizon_(horizon) {
    if (format_ == OutputFormat::csv) throw ParameterError("windows support jsonl and raw output only");
    if (format_ == OutputFormat::raw) {
        std::string header(kWindowMagic, 4);
        put_u16(header, kRawVersion);
        put_u16(header, 0);
        put_u32(header, checked_u32(total, "window count"));
        put_u32(header, checked_u32(context, "context length"));
        put_u32(header, checked_u32(horizon, "horizon"));
        out_.write(header.data(), static_cast<std::streamsize>(header.size()));
        check_stream(out_);
    }
}

void WindowWriter::write(const TrainingWindow& window, std::uint64_t batch_index, std::size_t row) {
    if (window.context.size() != context_ || window.target.size() != horizon_) {
        throw IoError("window writer: window geometry differs from the declared one");
    }
    if (written_ == total_) throw IoError("window writer: more windows than declared");
    buffer_.resize(context_ + horizon_);
    std::transform(window.context.begin(), window.context.end(), buffer_.begin(),
                   [](double v) { return static_cast<float>(v); });
    std::transform(window.target.begin(), window.target.end(), buffer_.begin() + static_cast<std::ptrdiff_t>(context_),
                   [](double v) { return static_cast<float>(v); });
    if (format_ == OutputFormat::raw) {
        std::string pad;
        put_u32(pad, static_cast<std::uint32_t>(window.pad_len));
        out_.write(pad.data(), 4);
        write_f32le(out_, buffer_.data(), buffer_.size());
    } else {
        line_ = "{\"batch\":" + std::to_string(batch_index) + ",\"row\":" + std::to_string(row) +
                ",\"start\":" + std::to_string(window.start) + ",\"pad_len\":" + std::to_string(window.pad_len) +
                ",\"context\":[";
        append_values(line_, buffer_.data(), context_, ',');
        line_ += "],\"target\":[";
        append_values(line_, buffer_.data() + context_, horizon_, ',');
        line_ += "]}\n";
        out_.write(line_.data(), static_cast<std::streamsize>(line_.size()));
    }
    ++written_;
    check_stream(out_);
}

void WindowWriter::finish() {
    if (written_ != total_) throw IoError("window writer: fewer windows written than declared");
    out_.flush();
    check_stream(out_);
}

SeriesFile read_series(std::istream& in) {
    const std::string text = slurp(in);
    if (text.empty()) throw IoError("series file is empty");
    SeriesFile file;

    if (text.size() >= 4 && std::memcmp(text.data(), kSeriesMagic, 4) == 0) {
        if (text.size() < kSeriesHeaderBytes) throw IoError("raw series: truncated header");
        const auto* p = reinterpret_cast<const unsigned char*>(text.data());
        if (get_u16(p + 4) != kRawVersion) throw IoError("raw series: unsupported version");
        file.rows = get_u32(p + 6);
        file.length = get_u32(p + 10);
        const std::size_t expect = kSeriesHeaderBytes + file.rows * file.length * 4;
        if (text.size() != expect) {
            throw IoError("raw series: payload is " + std::to_string(text.size()) + " bytes, header implies " +
                          std::to_string(expect));
        }
        file.format = OutputFormat::raw;
        file.data.resize(file.rows * file.length);
        read_f32le(p + kSeriesHeaderBytes, file.data.data(), file.data.size());
        return file;
    }

    const auto lines = split_lines(text);
    if (lines.empty()) throw IoError("series file has no rows");
    file.format = lines.front().front() == '{' ? OutputFormat::jsonl : OutputFormat::csv;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = "line " + std::to_string(i + 1);
        const auto values = file.format == OutputFormat::jsonl
                                ? json_float_array(lines[i], "values", where)
                                : parse_floats(lines[i].data(), lines[i].data() + lines[i].size(), ',', where);
        if (values.empty()) throw IoError(where + ": empty row");
        if (i == 0) file.length = values.size();
        if (values.size() != file.length) throw IoError(where + ": row length differs from the first row");
        file.data.insert(file.data.end(), values.begin(), values.end());
    }
    file.rows = lines.size();
    return file;
}

SeriesFile read_series_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_series(in);
}

WindowFile read_windows(std::istream& in) {
    const std::string text = slurp(in);
    if (text.empty()) throw IoError("window file is empty");
    WindowFile file;

    if (text.size() >= 4 && std::memcmp(text.data(), kWindowMagic, 4) == 0) {
        if (text.size() < kWindowHeaderBytes) throw IoError("raw windows: truncated header");
        const auto* p = reinterpret_cast<const unsigned char*>(text.data());
        if (get_u16(p + 4) != kRawVersion) throw IoError("raw windows: unsupported version");
        file.count = get_u32(p + 8);
        file.context = get_u32(p + 12);
        file.horizon = get_u32(p + 16);
        const std::size_t record = 4 + 4 * (file.context + file.horizon);
        if (text.size() != kWindowHeaderBytes + file.count * record) {
            throw IoError("raw windows: payload size does not match the header");
        }
        file.format = OutputFormat::raw;
        file.pad_len.resize(file.count);
        file.contexts.resize(file.count * file.context);
        file.targets.resize(file.count * file.horizon);
        for (std::size_t i = 0; i < file.count; ++i) {
            const unsigned char* r = p + kWindowHeaderBytes + i * record;
            file.pad_len[i] = static_cast<std::int32_t>(get_u32(r));
            read_f32le(r + 4, file.contexts.data() + i * file.context, file.context);
            read_f32le(r + 4 + 4 * file.context, file.targets.data() + i * file.horizon, file.horizon);
        }
        return file;
    }

    const auto lines = split_lines(text);
    file.format = OutputFormat::jsonl;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string where = "line " + std::to_string(i + 1);
        if (lines[i].front() != '{') throw IoError(where + ": not a window record");
        const auto ctx = json_float_array(lines[i], "context", where);
        const auto tgt = json_float_array(lines[i], "target", where);
        if (i == 0) {
            file.context = ctx.size();
            file.horizon = tgt.size();
        }
        if (ctx.size() != file.context || tgt.size() != file.horizon) {
            throw IoError(where + ": window geometry differs from the first record");
        }
        file.pad_len.push_back(static_cast<std::int32_t>(json_int(lines[i], "pad_len", where)));
        file.contexts.insert(file.contexts.end(), ctx.begin(), ctx.end());
        file.targets.insert(file.targets.end(), tgt.begin(), tgt.end());
    }
    file.count = lines.size();
    return file;
}

WindowFile read_windows_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_windows(in);
}

}  // namespace sarsim
