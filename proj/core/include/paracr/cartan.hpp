#pragma once

#include <array>
#include <string>
#include <vector>

#include "paracr/exterior.hpp"
#include "paracr/models.hpp"

namespace paracr {

// Coordinates (x, y, z, p, r, lambda, phi, sigma, sigmabar, u) on the 10-dimensional
// bundle over the flat model; r is the jet coordinate z_xx and lambda > 0 the fiber radius.
const Chart& bundle_chart();
// Sampling box with lambda bounded away from 0.
SampleBox bundle_box();

struct LiftedForms {
  std::array<Form, 5> omega;  // flat coframe on the base, pulled back
  std::array<Form, 5> theta;
  std::array<Form, 5> Omega;
};

LiftedForms lifted_forms();

using ConnectionMatrix = std::array<std::array<Form, 5>, 5>;

// so(3,2)-valued matrix built from (theta, Omega).
ConnectionMatrix connection(const LiftedForms& f);
// Identity-section connection B, built from the base coframe with varpi_2 = r omega^5.
ConnectionMatrix base_connection(const LiftedForms& f);

// Gauge matrix U on the fiber coordinates.
std::array<std::array<Expr, 5>, 5> gauge_matrix();

struct CartanReport {
  bool pass = true;
  std::vector<ResidualLine> lines;
  void add(ResidualLine l) {
    pass = pass && l.pass;
    lines.push_back(std::move(l));
  }
};

// Ten structure equations for d theta^k and d Omega_k.
CartanReport verify_edsf(const LiftedForms& f, const ZeroTestProtocol& proto);
// Entries of d omega + omega ^ omega.
CartanReport verify_flatness(const ConnectionMatrix& c, const ZeroTestProtocol& proto);
// omega = U B U^{-1} - dU U^{-1} at random bundle points, plus U = id on the identity section
// and the block-zero layout of U.
CartanReport verify_gauge_relation(const LiftedForms& f, int points, double tol, std::uint64_t seed);
// Pullback along lambda = 1, phi = sigma = sigmabar = u = 0; exact comparison.
CartanReport verify_identity_section(const LiftedForms& f);
CartanReport verify_dd(const LiftedForms& f, const ZeroTestProtocol& proto);
// Diagonal pairing (1,1) = -(5,5), (2,2) = -(4,4), (3,3) = 0 and vanishing trace.
CartanReport verify_entry_relations(const ConnectionMatrix& c, const ZeroTestProtocol& proto);
// Independence of the ten lifted forms.
CartanReport verify_independence(const LiftedForms& f, const ZeroTestProtocol& proto);

ZeroTestProtocol bundle_protocol(const ZeroTestProtocol& base);

}  // namespace paracr
