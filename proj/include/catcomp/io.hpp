#pragma once

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "catcomp/gates.hpp"
#include "catcomp/grids.hpp"
#include "catcomp/protocol.hpp"

namespace catcomp::io {

using Json = nlohmann::json;

// Shortest round-trip representation, so identical doubles always print identically.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("csv: bad number '" + s + "'");
    return v;
}

// ------------------------------------------------------------------ CSV

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> r) {
        if (r.size() != columns.size()) throw std::invalid_argument("Table: row width does not match header");
        rows.push_back(std::move(r));
    }
    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::runtime_error("Table: missing column '" + name + "'");
    }
    std::vector<double> column(const std::string& name) const {
        std::size_t k = index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }
};

inline std::string to_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
    return os.str();
}

inline Table parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    Table t;
    auto split = [](const std::string& l) {
        std::vector<std::string> f;
        std::string cur;
        for (char ch : l) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur += ch;
            }
        }
        f.push_back(cur);
        return f;
    };
    if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
    t.columns = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split(line);
        if (f.size() != t.columns.size()) throw std::runtime_error("csv: ragged row");
        std::vector<double> r;
        for (const auto& s : f) r.push_back(parse_double(s));
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline void write_csv(const std::filesystem::path& p, const Table& t) { write_text(p, to_csv(t)); }
inline Table read_csv(const std::filesystem::path& p) { return parse_csv(read_text(p)); }

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }
inline void write_json(const std::filesystem::path& p, const Json& j) { write_text(p, dump(j)); }
inline Json read_json(const std::filesystem::path& p) { return Json::parse(read_text(p)); }

// ------------------------------------------------------------------ device

inline Json to_json(const DeviceParams& d) {
    return {{"chi", d.chi},
            {"kerr", d.kerr},
            {"kerr_enabled", d.kerr_enabled},
            {"t1_cavity", d.t1_cavity},
            {"tphi_cavity", d.tphi_cavity},
            {"t1_qubit", d.t1_qubit},
            {"t2e_qubit", d.t2e_qubit},
            {"ecd_unit_duration", d.ecd_unit_duration},
            {"lever_alpha0", d.lever()},
            {"rotation_duration", d.rotation_duration},
            {"readout_p_gg", d.readout_p_gg},
            {"readout_p_ee", d.readout_p_ee},
            {"thermal_population", d.thermal_population}};
}

// Missing keys keep their defaults; unknown keys are rejected.
inline DeviceParams device_from_json(const Json& j) {
    if (!j.is_object()) throw std::runtime_error("device: expected an object");
    DeviceParams d;
    std::map<std::string, double*> num = {{"chi", &d.chi},
                                          {"kerr", &d.kerr},
                                          {"t1_cavity", &d.t1_cavity},
                                          {"tphi_cavity", &d.tphi_cavity},
                                          {"t1_qubit", &d.t1_qubit},
                                          {"t2e_qubit", &d.t2e_qubit},
                                          {"ecd_unit_duration", &d.ecd_unit_duration},
                                          {"lever_alpha0", &d.lever_alpha0},
                                          {"rotation_duration", &d.rotation_duration},
                                          {"readout_p_gg", &d.readout_p_gg},
                                          {"readout_p_ee", &d.readout_p_ee},
                                          {"thermal_population", &d.thermal_population}};
    for (const auto& [k, v] : j.items()) {
        if (k == "kerr_enabled") {
            d.kerr_enabled = v.get<bool>();
            continue;
        }
        auto it = num.find(k);
        if (it == num.end()) throw std::runtime_error("device: unknown key '" + k + "'");
        *it->second = v.get<double>();
    }
    d.validate();
    return d;
}

// ------------------------------------------------------------------ schedule

struct ScheduleDocument {
    CompressionSchedule schedule;
    std::uint64_t seed = 0;
    std::optional<double> achieved_overlap;
};

inline Json to_json(const ScheduleDocument& doc) {
    Json steps = Json::array();
    for (const auto& s : doc.schedule.steps) steps.push_back({{"u", s.u}, {"v", s.v}});
    Json j = {{"target_db", doc.schedule.target_db},
              {"variant", variant_name(doc.schedule.variant)},
              {"steps", steps},
              {"seed", doc.seed}};
    j["final_v"] = doc.schedule.final_v ? Json(*doc.schedule.final_v) : Json(nullptr);
    j["achieved_overlap"] = doc.achieved_overlap ? Json(*doc.achieved_overlap) : Json(nullptr);
    return j;
}

inline ScheduleDocument schedule_from_json(const Json& j) {
    for (const char* k : {"target_db", "variant", "steps"})
        if (!j.contains(k)) throw std::runtime_error(std::string("schedule: missing '") + k + "'");
    for (const auto& [k, v] : j.items())
        if (k != "target_db" && k != "variant" && k != "steps" && k != "final_v" && k != "seed" && k != "achieved_overlap")
            throw std::runtime_error("schedule: unknown key '" + k + "'");
    ScheduleDocument doc;
    doc.schedule.target_db = j.at("target_db").get<double>();
    doc.schedule.variant = parse_variant(j.at("variant").get<std::string>());
    for (const auto& s : j.at("steps")) doc.schedule.steps.push_back({s.at("u").get<double>(), s.at("v").get<double>()});
    if (j.contains("final_v") && !j.at("final_v").is_null()) doc.schedule.final_v = j.at("final_v").get<double>();
    if (j.contains("seed")) doc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("achieved_overlap") && !j.at("achieved_overlap").is_null())
        doc.achieved_overlap = j.at("achieved_overlap").get<double>();
    doc.schedule.validate(1e6);
    return doc;
}

// ------------------------------------------------------------------ grids
//
// A grid is a long-form CSV (one row per sample, the Im index outer) plus a JSON envelope holding
// the axes and metadata. The CSV alone is enough to plot; the envelope makes the shape explicit.

inline Table to_table(const CharGrid& g) {
    Table t{{"re_nu", "im_nu", "re_C", "im_C"}, {}};
    t.rows.reserve(g.re_axis.size() * g.im_axis.size());
    for (std::size_t i = 0; i < g.im_axis.size(); ++i)
        for (std::size_t j = 0; j < g.re_axis.size(); ++j) {
            const cplx c = g.values(Eigen::Index(i), Eigen::Index(j));
            t.rows.push_back({g.re_axis[j], g.im_axis[i], c.real(), c.imag()});
        }
    return t;
}

inline Table to_table(const WignerGrid& w) {
    Table t{{"re_beta", "im_beta", "W"}, {}};
    t.rows.reserve(w.re_axis.size() * w.im_axis.size());
    for (std::size_t i = 0; i < w.im_axis.size(); ++i)
        for (std::size_t j = 0; j < w.re_axis.size(); ++j)
            t.rows.push_back({w.re_axis[j], w.im_axis[i], w.values(Eigen::Index(i), Eigen::Index(j))});
    return t;
}

inline Json envelope(const CharGrid& g, const std::string& csv_name) {
    return {{"kind", "char_grid"}, {"csv", csv_name},   {"label", g.label},     {"time", g.time},
            {"n_re", g.re_axis.size()}, {"n_im", g.im_axis.size()}, {"re_axis", g.re_axis}, {"im_axis", g.im_axis}};
}

inline Json envelope(const WignerGrid& w, const std::string& csv_name) {
    return {{"kind", "wigner_grid"},       {"csv", csv_name},
            {"label", w.label},            {"time", w.time},
            {"n_re", w.re_axis.size()},    {"n_im", w.im_axis.size()},
            {"re_axis", w.re_axis},        {"im_axis", w.im_axis},
            {"pad_factor", w.pad_factor},  {"imag_residue", w.imag_residue}};
}

namespace detail {

inline void unpack_axes(const Table& t, std::size_t cx, std::size_t cy, std::vector<double>& xs, std::vector<double>& ys) {
    if (t.rows.empty()) throw std::runtime_error("grid csv: no rows");
    std::size_t nx = 0;
    while (nx < t.rows.size() && t.rows[nx][cy] == t.rows[0][cy]) ++nx;
    if (t.rows.size() % nx != 0) throw std::runtime_error("grid csv: rows are not a full rectangle");
    xs.clear();
    ys.clear();
    for (std::size_t j = 0; j < nx; ++j) xs.push_back(t.rows[j][cx]);
    for (std::size_t k = 0; k < t.rows.size(); k += nx) ys.push_back(t.rows[k][cy]);
    for (std::size_t k = 0; k < t.rows.size(); ++k)
        if (t.rows[k][cx] != xs[k % nx] || t.rows[k][cy] != ys[k / nx])
            throw std::runtime_error("grid csv: rows are not a full rectangle");
}

}  // namespace detail

inline CharGrid char_grid_from_table(const Table& t) {
    const std::size_t cx = t.index("re_nu"), cy = t.index("im_nu"), cr = t.index("re_C"), ci = t.index("im_C");
    CharGrid g;
    detail::unpack_axes(t, cx, cy, g.re_axis, g.im_axis);
    g.values.resize(Eigen::Index(g.im_axis.size()), Eigen::Index(g.re_axis.size()));
    for (std::size_t k = 0; k < t.rows.size(); ++k)
        g.values(Eigen::Index(k / g.re_axis.size()), Eigen::Index(k % g.re_axis.size())) = cplx(t.rows[k][cr], t.rows[k][ci]);
    return g;
}

inline WignerGrid wigner_grid_from_table(const Table& t) {
    const std::size_t cx = t.index("re_beta"), cy = t.index("im_beta"), cw = t.index("W");
    WignerGrid w;
    detail::unpack_axes(t, cx, cy, w.re_axis, w.im_axis);
    w.values.resize(Eigen::Index(w.im_axis.size()), Eigen::Index(w.re_axis.size()));
    for (std::size_t k = 0; k < t.rows.size(); ++k)
        w.values(Eigen::Index(k / w.re_axis.size()), Eigen::Index(k % w.re_axis.size())) = t.rows[k][cw];
    return w;
}

// ------------------------------------------------------------------ run directory

// Collects outputs of one experiment and writes them in a fixed order.
class RunDirectory {
public:
    explicit RunDirectory(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }

    void csv(const std::string& name, const Table& t) { files_[name] = to_csv(t); }
    void json(const std::string& name, const Json& j) { files_[name] = dump(j); }

    void grid(const std::string& stem, const CharGrid& g) {
        csv(stem + ".csv", to_table(g));
        json(stem + ".json", envelope(g, stem + ".csv"));
    }
    void grid(const std::string& stem, const WignerGrid& w) {
        csv(stem + ".csv", to_table(w));
        json(stem + ".json", envelope(w, stem + ".csv"));
    }

    std::vector<std::string> names() const {
        std::vector<std::string> n;
        for (const auto& [k, v] : files_) n.push_back(k);
        return n;
    }

    // summary.json gets the list of emitted files under "files".
    void flush(Json summary) {
        std::filesystem::create_directories(root_);
        std::vector<std::string> all = names();
        all.push_back("summary.json");
        std::sort(all.begin(), all.end());
        summary["files"] = all;
        files_["summary.json"] = dump(summary);
        for (const auto& [k, v] : files_) write_text(root_ / k, v);
    }

private:
    std::filesystem::path root_;
    std::map<std::string, std::string> files_;
};

}  // namespace catcomp::io
