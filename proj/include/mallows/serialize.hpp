#pragma once

#include <string>
#include <vector>

#include "mallows/bridge.hpp"
#include "mallows/partition.hpp"
#include "mallows/spectral.hpp"

namespace mallows::io {

// bridge.json: cost_kind, beta, m, tol, iterations, residual, gamma0,
// a_values (+ table_path for tabulated costs).
void save_bridge(const bridge::BridgeSolution& sol, const std::string& path);
bridge::BridgeSolution load_bridge(const std::string& path);

// spectrum.json: m, unit_eigenvalue_check, eigenvalues, sigma2, fredholm_det,
// conjectured_C, lipschitz_estimates. Eigenfunctions travel separately.
void save_spectrum(const spectral::Spectrum& spec, const std::string& path);
spectral::Spectrum load_spectrum(const std::string& path);

// One line per retained eigenfunction, m reals per line.
void save_eigenfunctions(const spectral::Spectrum& spec, const std::string& path);
// Fills eigenfunctions/retained of a spectrum loaded from JSON.
void load_eigenfunctions(spectral::Spectrum& spec, const std::string& path);

// partition.csv with header exactly: n,method,D_n,L_n,scaled,mc_stderr,seed
void save_partition_csv(const std::vector<partition::PartitionPoint>& table,
                        const std::string& path);

}  // namespace mallows::io
