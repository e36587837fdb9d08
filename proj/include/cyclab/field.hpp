#pragma once

#include <map>
#include <string>
#include <vector>

#include "cyclab/grid.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab {

// Physical variables carried by forecast files, plus derived/auxiliary names
// accepted by the on-disk format.
const std::vector<std::string>& known_variables();

// Multi-variable field tensor over (T x d x r x c). Values are finite; the
// variable list is unique and drawn from known_variables().
struct FieldSequence {
    GridGeometry geom;
    std::vector<std::string> vars;
    Tensor4 data;  // (T, d, r, c)

    int times() const { return data.t; }
    int var_index(const std::string& name) const;      // -1 if absent
    int require_var(const std::string& name) const;    // throws naming the variable
    void validate() const;
};

// The four channels consumed by the trajectory detector, same (T x r x c) shape.
struct DetectorInputs {
    GridGeometry geom;
    Tensor3 msl;        // Pa
    Tensor3 wind10;     // m/s, >= 0
    Tensor3 thickness;  // m^2/s^2 (z300 - z500)
    Tensor3 elevation;  // m
};

struct StandardizationStats {
    std::map<std::string, std::pair<double, double>> moments;  // name -> (mean, std)

    const std::pair<double, double>& get(const std::string& name) const;
    void set(const std::string& name, double mean, double std);
};

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

// wind10 = sqrt(u10^2 + v10^2); thickness = z300 - z500;
// elevation = surface_geopotential / gravity.
DetectorInputs derive_inputs(const FieldSequence& f, double gravity = kStandardGravity);

// Per-variable affine standardization and its inverse.
FieldSequence standardize(const FieldSequence& f, const StandardizationStats& s);
FieldSequence destandardize(const FieldSequence& f, const StandardizationStats& s);

// Variable-wise mean/std over the whole sequence (std floored at 1e-12).
StandardizationStats compute_stats(const FieldSequence& f);

// WFLD v1: one JSON header line, then raw little-endian f32 in (T,d,r,c) order.
void write_field(const FieldSequence& f, const std::string& path);
FieldSequence read_field(const std::string& path);

// Single-variable helpers for masks / labels / probability maps.
void write_mask(const Tensor3& m, const GridGeometry& g, const std::string& path,
                const std::string& varname = "mask");
std::pair<Tensor3, GridGeometry> read_mask(const std::string& path);

}  // namespace cyclab
