#include "cyclab/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace cyclab {

using nlohmann::json;

const std::vector<std::string>& known_variables() {
    static const std::vector<std::string> names = {
        "msl", "u10", "v10", "z300", "z500", "surface_geopotential",
        "wind10", "thickness", "elevation", "mask", "prob", "label"};
    return names;
}

int FieldSequence::var_index(const std::string& name) const {
    for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    return -1;
}

int FieldSequence::require_var(const std::string& name) const {
    int idx = var_index(name);
    if (idx < 0) throw std::invalid_argument("missing variable: " + name);
    return idx;
}

void FieldSequence::validate() const {
    geom.validate();
    if (data.t < 1) throw std::invalid_argument("field needs at least one timestep");
    if (static_cast<size_t>(data.d) != vars.size())
        throw std::invalid_argument("variable list does not match tensor depth");
    if (data.r != geom.rows || data.c != geom.cols)
        throw std::invalid_argument("tensor shape does not match grid");
    std::set<std::string> seen;
    const auto& known = known_variables();
    for (const auto& v : vars) {
        if (std::find(known.begin(), known.end(), v) == known.end())
            throw std::invalid_argument("unknown variable name: " + v);
        if (!seen.insert(v).second)
            throw std::invalid_argument("duplicate variable name: " + v);
    }
    for (double x : data.v)
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite value in field");
}

const std::pair<double, double>& StandardizationStats::get(const std::string& name) const {
    auto it = moments.find(name);
    if (it == moments.end()) throw std::invalid_argument("no stats for variable: " + name);
    if (it->second.second <= 0.0)
        throw std::invalid_argument("non-positive std for variable: " + name);
    return it->second;
}

void StandardizationStats::set(const std::string& name, double mean, double std) {
    if (std <= 0.0) throw std::invalid_argument("non-positive std for variable: " + name);
    moments[name] = {mean, std};
}

DetectorInputs derive_inputs(const FieldSequence& f, double gravity) {
    const int iu = f.require_var("u10"), iv = f.require_var("v10");
    const int i3 = f.require_var("z300"), i5 = f.require_var("z500");
    f.require_var("msl");
    const int im = f.var_index("msl");
    const int ig = f.require_var("surface_geopotential");

    const int T = f.data.t, r = f.data.r, c = f.data.c;
    DetectorInputs out;
    out.geom = f.geom;
    out.msl = Tensor3(T, r, c);
    out.wind10 = Tensor3(T, r, c);
    out.thickness = Tensor3(T, r, c);
    out.elevation = Tensor3(T, r, c);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double u = f.data(t, iu, i, j), v = f.data(t, iv, i, j);
                out.msl(t, i, j) = f.data(t, im, i, j);
                out.wind10(t, i, j) = std::sqrt(u * u + v * v);
                out.thickness(t, i, j) = f.data(t, i3, i, j) - f.data(t, i5, i, j);
                out.elevation(t, i, j) = f.data(t, ig, i, j) / gravity;
            }
    return out;
}

FieldSequence standardize(const FieldSequence& f, const StandardizationStats& s) {
    FieldSequence out = f;
    for (size_t di = 0; di < f.vars.size(); ++di) {
        auto [m, sd] = s.get(f.vars[di]);
        for (int t = 0; t < f.data.t; ++t)
            for (int i = 0; i < f.data.r; ++i)
                for (int j = 0; j < f.data.c; ++j)
                    out.data(t, static_cast<int>(di), i, j) =
                        (f.data(t, static_cast<int>(di), i, j) - m) / sd;
    }
    return out;
}

FieldSequence destandardize(const FieldSequence& f, const StandardizationStats& s) {
    FieldSequence out = f;
    for (size_t di = 0; di < f.vars.size(); ++di) {
        auto [m, sd] = s.get(f.vars[di]);
        for (int t = 0; t < f.data.t; ++t)
            for (int i = 0; i < f.data.r; ++i)
                for (int j = 0; j < f.data.c; ++j)
                    out.data(t, static_cast<int>(di), i, j) =
                        f.data(t, static_cast<int>(di), i, j) * sd + m;
    }
    return out;
}

StandardizationStats compute_stats(const FieldSequence& f) {
    StandardizationStats s;
    const size_t n = static_cast<size_t>(f.data.t) * f.data.r * f.data.c;
    for (size_t di = 0; di < f.vars.size(); ++di) {
        double sum = 0.0, sq = 0.0;
        for (int t = 0; t < f.data.t; ++t)
            for (int i = 0; i < f.data.r; ++i)
                for (int j = 0; j < f.data.c; ++j) {
                    double x = f.data(t, static_cast<int>(di), i, j);
                    sum += x;
                    sq += x * x;
                }
        double mean = sum / n;
        double var = std::max(sq / n - mean * mean, 0.0);
        s.set(f.vars[di], mean, std::max(std::sqrt(var), 1e-12));
    }
    return s;
}

namespace {

json geom_to_json(const GridGeometry& g) {
    return json{{"rows", g.rows}, {"cols", g.cols}, {"lat0", g.lat0},
                {"dlat", g.dlat}, {"lon0", g.lon0}, {"dlon", g.dlon}};
}

GridGeometry geom_from_json(const json& j) {
    GridGeometry g;
    g.rows = j.at("rows").get<int>();
    g.cols = j.at("cols").get<int>();
    g.lat0 = j.at("lat0").get<double>();
    g.dlat = j.at("dlat").get<double>();
    g.lon0 = j.at("lon0").get<double>();
    g.dlon = j.at("dlon").get<double>();
    return g;
}

}  // namespace

void write_field(const FieldSequence& f, const std::string& path) {
    f.validate();
    json hdr{{"magic", "WFLD1"},
             {"T", f.data.t},
             {"vars", f.vars},
             {"grid", geom_to_json(f.geom)},
             {"dtype", "f32le"}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << hdr.dump() << "\n";
    std::vector<float> buf(f.data.v.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(f.data.v[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

FieldSequence read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    json hdr = json::parse(line, nullptr, false);
    if (hdr.is_discarded() || !hdr.contains("magic") || hdr["magic"] != "WFLD1")
        throw std::runtime_error("magic mismatch: not a WFLD1 file: " + path);

    FieldSequence f;
    f.geom = geom_from_json(hdr.at("grid"));
    f.vars = hdr.at("vars").get<std::vector<std::string>>();
    const int T = hdr.at("T").get<int>();
    const int d = static_cast<int>(f.vars.size());
    f.data = Tensor4(T, d, f.geom.rows, f.geom.cols);

    std::vector<float> buf(f.data.v.size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != buf.size() * sizeof(float))
        throw std::runtime_error("payload size mismatch: " + path);
    char extra;
    if (in.read(&extra, 1)) throw std::runtime_error("payload size mismatch: " + path);

    for (size_t i = 0; i < buf.size(); ++i) f.data.v[i] = static_cast<double>(buf[i]);
    f.validate();  // rejects unknown variables and non-finite payloads
    return f;
}

void write_mask(const Tensor3& m, const GridGeometry& g, const std::string& path,
                const std::string& varname) {
    FieldSequence f;
    f.geom = g;
    f.vars = {varname};
    f.data = Tensor4(m.t, 1, m.r, m.c);
    f.data.v = m.v;
    write_field(f, path);
}

std::pair<Tensor3, GridGeometry> read_mask(const std::string& path) {
    FieldSequence f = read_field(path);
    if (f.vars.size() != 1)
        throw std::runtime_error("expected single-variable file: " + path);
    Tensor3 m(f.data.t, f.data.r, f.data.c);
    m.v = f.data.v;
    return {m, f.geom};
}

}  // namespace cyclab
