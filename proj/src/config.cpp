#include "sarsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sarsim/errors.hpp"

namespace sarsim {

using nlohmann::json;

const char* to_string(NoiserFamily family) noexcept {
    switch (family) {
        case NoiserFamily::poisson: return "poisson";
        case NoiserFamily::gen_gamma: return "gen_gamma";
        case NoiserFamily::lognormal: return "lognormal";
        case NoiserFamily::passthrough: return "passthrough";
    }
    return "unknown";
}

NoiserFamily noiser_family_from_string(const std::string& name) {
    if (name == "poisson") return NoiserFamily::poisson;
    if (name == "gen_gamma") return NoiserFamily::gen_gamma;
    if (name == "lognormal") return NoiserFamily::lognormal;
    if (name == "passthrough") return NoiserFamily::passthrough;
    throw ParameterError("unknown noiser family '" + name + "'");
}

namespace {

void check_range(std::vector<std::string>& errors, const std::string& name, const Range& r, double lo,
                 double hi, bool positive = false) {
    if (!(r.lo <= r.hi)) errors.push_back(name + ": lower bound exceeds upper bound");
    if (r.lo < lo || r.hi > hi) {
        std::ostringstream os;
        os << name << ": must lie within [" << lo << ", " << hi << "]";
        errors.push_back(os.str());
    }
    if (positive && !(r.lo > 0.0)) errors.push_back(name + ": bounds must be positive");
}

void check_int(std::vector<std::string>& errors, const std::string& name, int v, int lo, int hi) {
    if (v < lo || v > hi) {
        errors.push_back(name + ": must lie within [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

void check_radius(std::vector<std::string>& errors, const std::string& name, double r) {
    if (!(r > 0.0 && r < 1.0)) errors.push_back(name + ": must lie in (0, 1)");
}

void check_probability(std::vector<std::string>& errors, const std::string& name, double p) {
    if (!(p >= 0.0 && p <= 1.0)) errors.push_back(name + ": must lie in [0, 1]");
}

// Strict object reader: records unknown keys and type errors as diagnostics.
class Reader {
  public:
    Reader(const json& node, std::string path, std::vector<std::string>& errors)
        : node_(node), path_(std::move(path)), errors_(errors) {
        if (!node_.is_object()) {
            errors_.push_back(path_ + ": expected an object");
            return;
        }
        for (const auto& [key, _] : node_.items()) {
            (void)_;
            unknown_.insert(key);
        }
    }

    ~Reader() {
        for (const auto& key : unknown_) errors_.push_back(where(key) + ": unknown key");
    }

    const json* find(const std::string& key) {
        if (!node_.is_object()) return nullptr;
        unknown_.erase(key);
        const auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    void read(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (v->is_number_integer()) {
                out = v->get<int>();
            } else {
                errors_.push_back(where(key) + ": expected an integer");
            }
        }
    }

    void read(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (v->is_number()) {
                out = v->get<double>();
            } else {
                errors_.push_back(where(key) + ": expected a number");
            }
        }
    }

    void read(const std::string& key, Range& out) {
        if (const json* v = find(key)) {
            if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
                out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
            } else {
                errors_.push_back(where(key) + ": expected [lo, hi]");
            }
        }
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }
    std::vector<std::string>& errors() { return errors_; }

  private:
    const json& node_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> unknown_;
};

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

}  // namespace

std::vector<std::string> SimulatorConfig::validate() const {
    std::vector<std::string> errors;
    check_int(errors, "sequence_length", sequence_length, 2, 1 << 24);
    check_int(errors, "batch_size", batch_size, 1, 1 << 20);
    check_int(errors, "orders.p_max", orders.p_max, 0, 64);
    check_int(errors, "orders.q_max", orders.q_max, 0, 64);
    check_int(errors, "orders.P_max", orders.P_max, 0, 16);
    check_int(errors, "orders.Q_max", orders.Q_max, 0, 16);
    check_int(errors, "orders.s_max", orders.s_max, 0, 1024);
    check_radius(errors, "poles.ar_radius_max", poles.ar_radius_max);
    check_radius(errors, "poles.ma_radius_max", poles.ma_radius_max);
    check_radius(errors, "poles.seasonal_ar_radius_max", poles.seasonal_ar_radius_max);
    check_radius(errors, "poles.seasonal_ma_radius_max", poles.seasonal_ma_radius_max);
    check_range(errors, "integration.fractional_order", integration.fractional_order, 0.0, 1.0);
    check_int(errors, "integration.seasonal_order", integration.seasonal_order, 0, 1);
    check_int(errors, "integration.fir_taps", integration.fir_taps, 1, 1 << 16);
    check_probability(errors, "sarima2.probability", sarima2.probability);
    check_probability(errors, "sarima2.additive_probability", sarima2.additive_probability);
    check_range(errors, "sarima2.modulation_depth", sarima2.modulation_depth, 0.0, 1.0);
    if (sarima2.seasonality_pairs.empty() && sarima2.probability > 0.0) {
        errors.emplace_back("sarima2.seasonality_pairs: must be non-empty");
    }
    for (const auto& [base, env] : sarima2.seasonality_pairs) {
        if (base < 0 || env < 0 || base > 1024 || env > 1024) {
            errors.emplace_back("sarima2.seasonality_pairs: periods must lie within [0, 1024]");
        }
    }
    if (noisers.families.empty()) errors.emplace_back("noisers.families: must be non-empty");
    check_range(errors, "noisers.poisson.rate", noisers.poisson_rate, 0.0, 1e6, true);
    check_range(errors, "noisers.gen_gamma.rate", noisers.gamma_rate, 0.0, 1e6, true);
    check_range(errors, "noisers.gen_gamma.shape", noisers.gamma_shape, 0.0, 1e6, true);
    check_range(errors, "noisers.gen_gamma.power", noisers.gamma_power, 0.0, 10.0, true);
    check_range(errors, "noisers.lognormal.rate", noisers.lognormal_rate, 0.0, 50.0, true);
    check_range(errors, "noisers.lognormal.shape", noisers.lognormal_shape, 0.0, 10.0, true);
    check_int(errors, "window.context", window.context, 1, 1 << 24);
    check_int(errors, "window.horizon", window.horizon, 1, 1 << 24);
    check_int(errors, "window.max_pad", window.max_pad, 0, window.context - 1);
    if (window.span() > sequence_length) {
        errors.emplace_back("window: context + horizon must not exceed sequence_length");
    }
    check_int(errors, "retry_cap", retry_cap, 1, 1 << 16);
    if (!(divergence_limit > 0.0)) errors.emplace_back("divergence_limit: must be positive");
    return errors;
}

void SimulatorConfig::check() const {
    const auto errors = validate();
    if (errors.empty()) return;
    std::string message = "invalid configuration:";
    for (const auto& e : errors) message += "\n  " + e;
    throw ParameterError(message);
}

json to_json(const SimulatorConfig& c) {
    json pairs = json::array();
    for (const auto& [base, env] : c.sarima2.seasonality_pairs) pairs.push_back({base, env});
    json families = json::array();
    for (const auto f : c.noisers.families) families.push_back(to_string(f));
    return {
        {"sequence_length", c.sequence_length},
        {"batch_size", c.batch_size},
        {"orders",
         {{"p_max", c.orders.p_max},
          {"q_max", c.orders.q_max},
          {"P_max", c.orders.P_max},
          {"Q_max", c.orders.Q_max},
          {"s_max", c.orders.s_max}}},
        {"poles",
         {{"ar_radius_max", c.poles.ar_radius_max},
          {"ma_radius_max", c.poles.ma_radius_max},
          {"seasonal_ar_radius_max", c.poles.seasonal_ar_radius_max},
          {"seasonal_ma_radius_max", c.poles.seasonal_ma_radius_max}}},
        {"integration",
         {{"fractional_order", range_json(c.integration.fractional_order)},
          {"seasonal_order", c.integration.seasonal_order},
          {"fir_taps", c.integration.fir_taps}}},
        {"sarima2",
         {{"probability", c.sarima2.probability},
          {"seasonality_pairs", pairs},
          {"additive_probability", c.sarima2.additive_probability},
          {"modulation_depth", range_json(c.sarima2.modulation_depth)},
          {"envelope_upsampling", c.sarima2.upsampling == EnvelopeUpsampling::hold ? "hold" : "linear"}}},
        {"noisers",
         {{"families", families},
          {"poisson", {{"rate", range_json(c.noisers.poisson_rate)}}},
          {"gen_gamma",
           {{"rate", range_json(c.noisers.gamma_rate)},
            {"shape", range_json(c.noisers.gamma_shape)},
            {"power", range_json(c.noisers.gamma_power)}}},
          {"lognormal",
           {{"rate", range_json(c.noisers.lognormal_rate)}, {"shape", range_json(c.noisers.lognormal_shape)}}}}},
        {"window",
         {{"context", c.window.context}, {"horizon", c.window.horizon}, {"max_pad", c.window.max_pad}}},
        {"retry_cap", c.retry_cap},
        {"divergence_limit", c.divergence_limit},
    };
}

SimulatorConfig config_from_json(const json& doc) {
    SimulatorConfig c;
    std::vector<std::string> errors;
    {
        Reader root(doc, "config", errors);
        root.read("sequence_length", c.sequence_length);
        root.read("batch_size", c.batch_size);
        root.read("retry_cap", c.retry_cap);
        root.read("divergence_limit", c.divergence_limit);
        if (const json* node = root.find("orders")) {
            Reader r(*node, root.where("orders"), errors);
            r.read("p_max", c.orders.p_max);
            r.read("q_max", c.orders.q_max);
            r.read("P_max", c.orders.P_max);
            r.read("Q_max", c.orders.Q_max);
            r.read("s_max", c.orders.s_max);
        }
        if (const json* node = root.find("poles")) {
            Reader r(*node, root.where("poles"), errors);
            r.read("ar_radius_max", c.poles.ar_radius_max);
            r.read("ma_radius_max", c.poles.ma_radius_max);
            r.read("seasonal_ar_radius_max", c.poles.seasonal_ar_radius_max);
            r.read("seasonal_ma_radius_max", c.poles.seasonal_ma_radius_max);
        }
        if (const json* node = root.find("integration")) {
            Reader r(*node, root.where("integration"), errors);
            r.read("fractional_order", c.integration.fractional_order);
            r.read("seasonal_order", c.integration.seasonal_order);
            r.read("fir_taps", c.integration.fir_taps);
        }
        if (const json* node = root.find("sarima2")) {
            Reader r(*node, root.where("sarima2"), errors);
            r.read("probability", c.sarima2.probability);
            r.read("additive_probability", c.sarima2.additive_probability);
            r.read("modulation_depth", c.sarima2.modulation_depth);
            if (const json* pairs = r.find("seasonality_pairs")) {
                c.sarima2.seasonality_pairs.clear();
                bool ok = pairs->is_array();
                if (ok) {
                    for (const auto& p : *pairs) {
                        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
                            !p[1].is_number_integer()) {
                            ok = false;
                            break;
                        }
                        c.sarima2.seasonality_pairs.push_back({p[0].get<int>(), p[1].get<int>()});
                    }
                }
                if (!ok) errors.push_back(r.where("seasonality_pairs") + ": expected [[base, envelope], ...]");
            }
            if (const json* mode = r.find("envelope_upsampling")) {
                if (*mode == "hold") {
                    c.sarima2.upsampling = EnvelopeUpsampling::hold;
                } else if (*mode == "linear") {
                    c.sarima2.upsampling = EnvelopeUpsampling::linear;
                } else {
                    errors.push_back(r.where("envelope_upsampling") + ": expected \"hold\" or \"linear\"");
                }
            }
        }
        if (const json* node = root.find("noisers")) {
            Reader r(*node, root.where("noisers"), errors);
            if (const json* fams = r.find("families")) {
                c.noisers.families.clear();
                if (!fams->is_array()) errors.push_back(r.where("families") + ": expected an array of names");
                for (const auto& f : *fams) {
                    try {
                        c.noisers.families.push_back(noiser_family_from_string(f.get<std::string>()));
                    } catch (const std::exception& e) {
                        errors.push_back(r.where("families") + ": " + e.what());
                    }
                }
            }
            if (const json* n = r.find("poisson")) {
                Reader rr(*n, r.where("poisson"), errors);
                rr.read("rate", c.noisers.poisson_rate);
            }
            if (const json* n = r.find("gen_gamma")) {
                Reader rr(*n, r.where("gen_gamma"), errors);
                rr.read("rate", c.noisers.gamma_rate);
                rr.read("shape", c.noisers.gamma_shape);
                rr.read("power", c.noisers.gamma_power);
            }
            if (const json* n = r.find("lognormal")) {
                Reader rr(*n, r.where("lognormal"), errors);
                rr.read("rate", c.noisers.lognormal_rate);
                rr.read("shape", c.noisers.lognormal_shape);
            }
        }
        if (const json* node = root.find("window")) {
            Reader r(*node, root.where("window"), errors);
            r.read("context", c.window.context);
            r.read("horizon", c.window.horizon);
            r.read("max_pad", c.window.max_pad);
        }
    }
    for (const auto& e : c.validate()) errors.push_back(e);
    if (!errors.empty()) {
        std::string message = "invalid configuration:";
        for (const auto& e : errors) message += "\n  " + e;
        throw ParameterError(message);
    }
    return c;
}

SimulatorConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParameterError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(doc);
}

}  // namespace sarsim
