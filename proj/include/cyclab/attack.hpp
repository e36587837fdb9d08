#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cyclab/field.hpp"
#include "cyclab/labels.hpp"
#include "cyclab/surrogate.hpp"
#include "cyclab/tensor.hpp"

namespace cyclab {

enum class AttackMethod {
    Cyc,
    CycNoDilation,
    CycNoWeighting,
    CycNoDilationNoWeighting,  // both ablations off; coincides with Taaowpf
    Ala,
    Taaowpf,
    Aowf
};

AttackMethod attack_method_from_string(const std::string& s);
std::string to_string(AttackMethod m);

struct AttackConfig {
    double eta = 0.01;          // step size
    double delta = 10.0;        // l-inf clip radius, standardized units
    int iters = 1000;
    double lambda_reg = 0.1;
    double sigma_grad = 5.0 * kDegToRad;  // radians
    double sigma_reg = 5.0 * kDegToRad;
    DilationParams dilation{1.0, 1};      // attack-target dilation
    AttackMethod method = AttackMethod::Cyc;
    uint64_t seed = 0;

    static AttackConfig from_json_file(const std::string& path);
    std::string to_json() const;
};

// Variables the attack may touch; elevation/forcing stay frozen.
const std::vector<std::string>& perturbable_variables();

// M = 1(Zstar != Z) * 1(threshold(P0) == Zstar).
Tensor3 calibration_mask(const Tensor3& zstar, const Tensor3& z, const Tensor3& prob0);

struct DistanceWeights {
    Tensor3 w_grad, w_reg;
};

// Eq-style distance weights: w_grad = 1 and w_reg = 0 on target cells;
// elsewhere Gaussian decay / growth in the great-circle distance (radians) to
// the nearest target cell. Empty target set at a timestep means d = 0.
DistanceWeights distance_weights(const Tensor3& zstar, const GridGeometry& geom,
                                 double sigma_grad, double sigma_reg);

// Gamma-modulated focal term on the dilated target plus the distance-weighted
// l2 regularizer, both averaged over timesteps.
double adv_loss(const Tensor3& prob, const Tensor3& zstar_dilated, const Tensor3& calib,
                const Tensor3& w_reg, const Tensor4& y_std, const Tensor4& yprime_std,
                double lambda);

struct TraceRow {
    int iter = 0;
    double loss = 0.0;
    double linf = 0.0;
};

struct AttackResult {
    FieldSequence adversarial;       // physical units
    std::vector<TraceRow> trace;
    Tensor4 delta_std;               // perturbation in standardized units
};

// Runs the configured attack (Cyc-Attack variants or baselines) against the
// surrogate. The l-inf ball lives in standardized units; the physical output
// is orig + sigma_v * delta, so a zero perturbation is bit-identical to the
// input. Throws on NaN loss.
AttackResult run_attack(const FieldSequence& orig, const Tensor3& z, const Tensor3& zstar,
                        const SurrogateModel& model, const AttackConfig& cfg,
                        double gravity = kStandardGravity);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace cyclab
