#pragma once

#include "mkernel/control.hpp"
#include "mkernel/domain.hpp"
#include "mkernel/energy.hpp"
#include "mkernel/estimation.hpp"
#include "mkernel/integral_pd.hpp"
#include "mkernel/kernel.hpp"
#include "mkernel/pd_certify.hpp"
#include "mkernel/spectral.hpp"

#include <json.hpp>

#include <vector>

namespace mkernel::io {

using nlohmann::json;

json to_json(const Eigen::VectorXd &v);
/// Array of rows.
json to_json(const Eigen::MatrixXd &m);
Eigen::VectorXd vector_from_json(const json &j);
Eigen::MatrixXd matrix_from_json(const json &j);
std::vector<Point> points_from_json(const json &j);
json to_json(const std::vector<Point> &points);

/**
 * Kernel trees as single-key objects:
 *   {"gaussian": 1.0}, {"riesz": {"s": 1, "eta": 0.1}}, "brownian", "neg_distance",
 *   {"constant": 2}, {"lift": {"scalar": K, "matrix": A}}, {"conjugate": {"kernel": K, "matrix": B}},
 *   {"sum": [K1, K2]}, {"scale": {"alpha": a, "kernel": K}}, {"block_diag": [K1, K2]}.
 * The leaves without parameters may also be written as {"brownian": {}}.
 */
json to_json(const KernelSpec &spec);
KernelSpec kernel_spec_from_json(const json &j);

/// {"kind": "box", "lower": [...], "upper": [...]} or {"kind": "circle", "radius": r}.
/// "type" is accepted in place of "kind".
json to_json(const Domain &domain);
Domain domain_from_json(const json &j);

/// {"rule": "trapezoid", "resolution": 65} (or a per-axis resolution array), or
/// explicit {"nodes": [[...]], "weights": [...]}.
QuadratureMeasure measure_from_json(const Domain &domain, const json &j);
json to_json(const QuadratureMeasure &measure);
json summary_json(const QuadratureMeasure &measure);

json to_json(const Witness &witness);
json to_json(const PDReport &report);
json to_json(const SearchResult &result);
json to_json(const IntegralVerdict &verdict);
json to_json(const HarnessReport &report);
json to_json(const GapReport &report);
/// Leading rank eigenvalues with their node samples, plus the spectrum diagnostics.
json to_json(const SpectralDecomposition &decomp, int rank);
json to_json(const EnergyRun &run);
json to_json(const CapacityStudy &study);
json to_json(const ControlSolution &solution);
json to_json(const EstimationDataset &data);
EstimationDataset dataset_from_json(const json &j);

}  // namespace mkernel::io
