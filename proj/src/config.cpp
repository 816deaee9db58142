#include "opencav/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace opencav {

using nlohmann::json;

const char* study_name(Study s) {
    switch (s) {
        case Study::Transmit: return "transmit";
        case Study::Spectrum: return "spectrum";
        case Study::Rigidity: return "rigidity";
        case Study::EpFind: return "ep-find";
        case Study::Delay: return "delay";
        case Study::Crossover: return "crossover";
    }
    return "?";
}

std::optional<Study> study_from_name(const std::string& name) {
    for (Study s : {Study::Transmit, Study::Spectrum, Study::Rigidity, Study::EpFind, Study::Delay, Study::Crossover})
        if (name == study_name(s)) return s;
    return std::nullopt;
}

std::vector<double> EnergyGrid::values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    if (points == 1) {
        v[0] = min;
        return v;
    }
    for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = min + (max - min) * i / (points - 1);
    return v;
}

std::vector<double> AlphaGrid::values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    if (points == 1) {
        v[0] = min;
        return v;
    }
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        v[static_cast<std::size_t>(i)] =
            log_scale ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
    }
    return v;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ValidationError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
    }
}

std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double number(const json& obj, const std::string& where, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(join(where, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(join(where, key), "must be finite");
    return d;
}

int integer(const json& obj, const std::string& where, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ValidationError(join(where, key), "expected an integer");
    return v.get<int>();
}

std::pair<int, int> cell(const json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw ValidationError(field, "expected [x, y]");
    return {v[0].get<int>(), v[1].get<int>()};
}

std::vector<bool> parse_mask_rows(const std::vector<std::string>& rows, int nx, int ny, const std::string& field) {
    if (static_cast<int>(rows.size()) != ny) throw ValidationError(field, "mask needs ny rows");
    std::vector<bool> mask;
    mask.reserve(static_cast<std::size_t>(nx * ny));
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != nx) throw ValidationError(field, "mask rows need nx characters");
        for (char ch : row) {
            if (ch == '#' || ch == '1')
                mask.push_back(true);
            else if (ch == '.' || ch == '0')
                mask.push_back(false);
            else
                throw ValidationError(field, std::string("unexpected mask character '") + ch + "'");
        }
    }
    return mask;
}

std::vector<std::string> read_mask_file(const std::string& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ValidationError(field, "cannot read mask file " + path);
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    return rows;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("grid-override", "expected key=value, got " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw ValidationError("grid-override", "empty path component in " + path);
        if (!node->is_object()) throw ValidationError("grid-override", path + " does not address an object member");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        pos = dot + 1;
    }
}

void require_band(double e, const std::string& field) {
    if (!(std::abs(e) < 2.0)) throw ValidationError(field, "energy must lie inside the open band (-2, 2)");
}

ModelConfig read_model(const json& m, const std::string& base_dir) {
    const std::string where = "model";
    check_keys(m, where, {"lattice", "leads", "alpha"});
    ModelConfig out;
    if (!m.contains("lattice")) throw ValidationError("model.lattice", "missing");
    const auto& lat = m.at("lattice");
    check_keys(lat, "model.lattice", {"nx", "ny", "onsite", "mask", "mask_path", "potential"});
    out.nx = integer(lat, "model.lattice", "nx", 1);
    out.ny = integer(lat, "model.lattice", "ny", 1);
    if (out.nx < 1) throw ValidationError("model.lattice.nx", "must be positive");
    if (out.ny < 1) throw ValidationError("model.lattice.ny", "must be positive");
    out.onsite = number(lat, "model.lattice", "onsite", 0.0);

    if (lat.contains("mask") && lat.contains("mask_path"))
        throw ValidationError("model.lattice.mask", "give either mask or mask_path");
    if (lat.contains("mask")) {
        const auto& rows = lat.at("mask");
        if (!rows.is_array()) throw ValidationError("model.lattice.mask", "expected an array of strings");
        std::vector<std::string> text;
        for (const auto& r : rows) {
            if (!r.is_string()) throw ValidationError("model.lattice.mask", "expected an array of strings");
            text.push_back(r.get<std::string>());
        }
        out.mask = parse_mask_rows(text, out.nx, out.ny, "model.lattice.mask");
    } else if (lat.contains("mask_path")) {
        if (!lat.at("mask_path").is_string()) throw ValidationError("model.lattice.mask_path", "expected a string");
        std::filesystem::path p = lat.at("mask_path").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        out.mask = parse_mask_rows(read_mask_file(p.string(), "model.lattice.mask_path"), out.nx, out.ny,
                                   "model.lattice.mask_path");
    }
    if (lat.contains("potential")) {
        const auto& pv = lat.at("potential");
        if (!pv.is_array() || static_cast<int>(pv.size()) != out.nx * out.ny)
            throw ValidationError("model.lattice.potential", "expected nx*ny numbers");
        std::vector<double> v;
        for (const auto& x : pv) {
            if (!x.is_number()) throw ValidationError("model.lattice.potential", "expected numbers");
            v.push_back(x.get<double>());
        }
        out.potential = std::move(v);
    }

    if (!m.contains("leads")) throw ValidationError("model.leads", "missing");
    const auto& leads = m.at("leads");
    check_keys(leads, "model.leads", {"L", "R"});
    for (const char* name : {"L", "R"}) {
        const std::string lw = std::string("model.leads.") + name;
        if (!leads.contains(name)) throw ValidationError(lw, "missing");
        const auto& l = leads.at(name);
        check_keys(l, lw, {"site", "coupling_w"});
        if (!l.contains("site")) throw ValidationError(lw + ".site", "missing");
        const auto [x, y] = cell(l.at("site"), lw + ".site");
        LeadConfig lc{x, y, number(l, lw, "coupling_w", 1.0)};
        if (lc.coupling_w < 0.0) throw ValidationError(lw + ".coupling_w", "must be >= 0");
        (std::string(name) == "L" ? out.left : out.right) = lc;
    }
    out.alpha = number(m, where, "alpha", 1.0);
    if (out.alpha < 0.0) throw ValidationError("model.alpha", "must be >= 0");

    try {
        build_model(out, out.alpha).validate();
    } catch (const InvalidGeometry& e) {
        throw ValidationError("model.lattice", e.what());
    }
    return out;
}

}  // namespace

CavityModel build_model(const ModelConfig& m, double alpha) {
    CavityModel model;
    model.lattice.nx = m.nx;
    model.lattice.ny = m.ny;
    model.lattice.onsite = m.onsite;
    model.lattice.mask = m.mask;
    model.lattice.potential = m.potential;
    const int l = model.lattice.site_index(m.left.x, m.left.y);
    const int r = model.lattice.site_index(m.right.x, m.right.y);
    if (l < 0) throw ValidationError("model.leads.L.site", "not an interior site");
    if (r < 0) throw ValidationError("model.leads.R.site", "not an interior site");
    model.left = {LeadSide::Left, l, m.left.coupling_w};
    model.right = {LeadSide::Right, r, m.right.coupling_w};
    model.alpha = alpha;
    return model;
}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("config: syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(column),
                         line, column);
    }
    for (const auto& o : overrides) apply_override(doc, o);

    check_keys(doc, "", {"format_version", "study", "model", "e_grid", "alpha_grid", "track_energy", "delay_step",
                         "ep", "output_path"});
    if (doc.contains("format_version") &&
        (!doc.at("format_version").is_number_integer() || doc.at("format_version").get<int>() != kConfigVersion))
        throw ValidationError("format_version", "unsupported version");

    RunConfig cfg;
    if (doc.contains("study")) {
        const auto& s = doc.at("study");
        const auto study = s.is_string() ? study_from_name(s.get<std::string>()) : std::nullopt;
        if (!study) throw ValidationError("study", "unknown study");
        cfg.study = *study;
    }
    if (!doc.contains("model")) throw ValidationError("model", "missing");
    cfg.model = read_model(doc.at("model"), base_dir);

    if (doc.contains("e_grid")) {
        const auto& g = doc.at("e_grid");
        check_keys(g, "e_grid", {"min", "max", "points"});
        cfg.e_grid.min = number(g, "e_grid", "min", cfg.e_grid.min);
        cfg.e_grid.max = number(g, "e_grid", "max", cfg.e_grid.max);
        cfg.e_grid.points = integer(g, "e_grid", "points", cfg.e_grid.points);
    }
    if (cfg.e_grid.points < 1) throw ValidationError("e_grid.points", "must be >= 1");
    require_band(cfg.e_grid.min, "e_grid.min");
    require_band(cfg.e_grid.max, "e_grid.max");
    if (cfg.e_grid.max < cfg.e_grid.min) throw ValidationError("e_grid.max", "must be >= e_grid.min");

    if (doc.contains("alpha_grid")) {
        const auto& g = doc.at("alpha_grid");
        check_keys(g, "alpha_grid", {"min", "max", "points", "scale"});
        cfg.alpha_grid.min = number(g, "alpha_grid", "min", cfg.alpha_grid.min);
        cfg.alpha_grid.max = number(g, "alpha_grid", "max", cfg.alpha_grid.max);
        cfg.alpha_grid.points = integer(g, "alpha_grid", "points", cfg.alpha_grid.points);
        if (g.contains("scale")) {
            const auto& s = g.at("scale");
            if (s == "log")
                cfg.alpha_grid.log_scale = true;
            else if (s == "linear")
                cfg.alpha_grid.log_scale = false;
            else
                throw ValidationError("alpha_grid.scale", "expected \"linear\" or \"log\"");
        }
    }
    if (cfg.alpha_grid.points < 1) throw ValidationError("alpha_grid.points", "must be >= 1");
    if (cfg.alpha_grid.min < 0.0) throw ValidationError("alpha_grid.min", "must be >= 0");
    if (cfg.alpha_grid.max < cfg.alpha_grid.min) throw ValidationError("alpha_grid.max", "must be >= alpha_grid.min");
    if (cfg.alpha_grid.log_scale && !(cfg.alpha_grid.min > 0.0))
        throw ValidationError("alpha_grid.min", "log scale needs a positive minimum");

    cfg.track_energy = number(doc, "", "track_energy", 0.0);
    require_band(cfg.track_energy, "track_energy");
    cfg.delay_step = number(doc, "", "delay_step", 1e-5);
    if (!(cfg.delay_step > 0.0)) throw ValidationError("delay_step", "must be positive");

    if (doc.contains("ep")) {
        const auto& e = doc.at("ep");
        check_keys(e, "ep", {"energy", "start", "plus_site", "minus_site"});
        EpConfig ep;
        ep.energy = number(e, "ep", "energy", 0.0);
        require_band(ep.energy, "ep.energy");
        if (e.contains("start")) {
            const auto& s = e.at("start");
            if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
                throw ValidationError("ep.start", "expected [alpha, split]");
            ep.start_alpha = s[0].get<double>();
            ep.start_split = s[1].get<double>();
        }
        if (!e.contains("plus_site") || !e.contains("minus_site"))
            throw ValidationError("ep.plus_site", "plus_site and minus_site are required");
        ep.plus_site = cell(e.at("plus_site"), "ep.plus_site");
        ep.minus_site = cell(e.at("minus_site"), "ep.minus_site");
        const auto model = build_model(cfg.model, cfg.model.alpha);
        if (model.lattice.site_index(ep.plus_site.first, ep.plus_site.second) < 0)
            throw ValidationError("ep.plus_site", "not an interior site");
        if (model.lattice.site_index(ep.minus_site.first, ep.minus_site.second) < 0)
            throw ValidationError("ep.minus_site", "not an interior site");
        cfg.ep = ep;
    }
    if (doc.contains("output_path")) {
        if (!doc.at("output_path").is_string()) throw ValidationError("output_path", "expected a string");
        cfg.output_path = doc.at("output_path").get<std::string>();
    }
    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json lat = {{"nx", cfg.model.nx}, {"ny", cfg.model.ny}, {"onsite", cfg.model.onsite}};
    if (cfg.model.mask) {
        json rows = json::array();
        for (int y = 0; y < cfg.model.ny; ++y) {
            std::string row;
            for (int x = 0; x < cfg.model.nx; ++x)
                row += (*cfg.model.mask)[static_cast<std::size_t>(y * cfg.model.nx + x)] ? '#' : '.';
            rows.push_back(row);
        }
        lat["mask"] = rows;
    }
    if (cfg.model.potential) lat["potential"] = *cfg.model.potential;

    auto lead = [](const LeadConfig& l) { return json{{"site", {l.x, l.y}}, {"coupling_w", l.coupling_w}}; };
    json doc = {
        {"format_version", kConfigVersion},
        {"study", study_name(cfg.study)},
        {"model", {{"lattice", lat}, {"leads", {{"L", lead(cfg.model.left)}, {"R", lead(cfg.model.right)}}},
                   {"alpha", cfg.model.alpha}}},
        {"e_grid", {{"min", cfg.e_grid.min}, {"max", cfg.e_grid.max}, {"points", cfg.e_grid.points}}},
        {"alpha_grid",
         {{"min", cfg.alpha_grid.min},
          {"max", cfg.alpha_grid.max},
          {"points", cfg.alpha_grid.points},
          {"scale", cfg.alpha_grid.log_scale ? "log" : "linear"}}},
        {"track_energy", cfg.track_energy},
        {"delay_step", cfg.delay_step},
        {"output_path", cfg.output_path},
    };
    if (cfg.ep) {
        doc["ep"] = {{"energy", cfg.ep->energy},
                     {"start", {cfg.ep->start_alpha, cfg.ep->start_split}},
                     {"plus_site", {cfg.ep->plus_site.first, cfg.ep->plus_site.second}},
                     {"minus_site", {cfg.ep->minus_site.first, cfg.ep->minus_site.second}}};
    }
    return doc.dump();
}

}  // namespace opencav
