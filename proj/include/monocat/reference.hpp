#pragma once

// Single-threaded versions of the OpenMP kernels. Same arithmetic in the same
// order, so results match the parallel versions bit for bit.

#include <span>
#include <vector>

#include "monocat/valuation.hpp"

namespace monocat::reference {

PercentileCurve compose_h(const SenderWeighting& s, const ReceiverCdf& r, int m);

OracleResult dp_oracle(const SenderWeighting& s, const ReceiverCdf& r, int n, int max_n = kMaxOracleCells);

std::vector<double> sender_values(std::span<const Categorization> cats, const SenderWeighting& s,
                                  const ReceiverCdf& r);

double psi_dominance_margin(const Categorization& best, std::span<const Categorization> others,
                            const SenderWeighting& s, const ReceiverCdf& r, std::span<const double> grid);

}  // namespace monocat::reference
