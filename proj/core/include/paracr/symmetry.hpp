#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paracr/exterior.hpp"
#include "paracr/models.hpp"
#include "paracr/paracr.hpp"

namespace paracr {

struct SymmetryResiduals {
  std::array<Form, 5> conditions;
  // L_X omega^1 ^ omega^1 and L_X omega^2 ^ omega^1 ^ omega^2: the contact ideal is preserved.
  std::array<Form, 2> contact;
};

SymmetryResiduals symmetry_residuals(const VectorField& X, const PdePair& pair);

struct SymmetryVerdict {
  bool symmetry = true;
  bool contact = true;
  std::array<ZeroCertificate, 5> conditions;
  std::array<ZeroCertificate, 2> contact_certs;
  // First failing condition, 1-based; 0 when all pass.
  int first_failure = 0;
};

SymmetryVerdict check_symmetry(const VectorField& X, const PdePair& pair, const ZeroTestProtocol& proto);

// Lie algebra data as exact brackets [X_i, X_j] = sum_k c_k X_k for i < j.
struct BracketTable {
  int n = 0;
  std::map<std::pair<int, int>, std::vector<Q>> c;
  std::vector<Q> get(int i, int j) const;
};

struct GeneratorSet {
  std::string id;
  PdePair pair;
  std::vector<VectorField> fields;
  BracketTable expected;
};

// Catalog generators with b (and the bound symbols) instantiated, written on the pair chart.
GeneratorSet generator_set(const ModelSpec& m, const std::optional<Q>& b);

struct GeneratorReport {
  std::string id;
  bool pass = true;
  std::vector<SymmetryVerdict> verdicts;
  int rank = 0;  // rank over constants, from stacked samples
};

GeneratorReport verify_generator_catalog(const GeneratorSet& g, const ZeroTestProtocol& proto);

struct CommutatorResult {
  BracketTable table;
  bool closed = true;
  std::vector<std::pair<int, int>> not_in_span;
  // Entries differing from the expected table (0-based pairs).
  std::vector<std::pair<int, int>> mismatches;
  bool matches = true;
};

CommutatorResult commutator_table(const GeneratorSet& g, const ZeroTestProtocol& proto);

struct AlgebraReport {
  int dimension = 0;
  bool jacobi = true;
  std::vector<int> derived_series;  // dimensions g, [g,g], ...
  bool solvable = false;
  bool ideal = false;
  bool abelian = false;
};

// The candidate ideal defaults to span{X3, X4, X5}.
AlgebraReport algebra_analysis(const BracketTable& t, const std::vector<int>& ideal = {2, 3, 4});

struct DeterminingResult {
  int degree = 0;
  int unknowns = 0;
  std::vector<VectorField> basis;
  bool verified = true;
  // Some kernel element uses monomials of the top degree.
  bool possibly_incomplete = false;
};

// Polynomial ansatz in (x, y, z, p, r): total degree <= degree for the x, y, z components and
// <= degree + 1 for the p, r components. F and H must be polynomial.
DeterminingResult solve_determining_equations(const PdePair& pair, int degree, const ZeroTestProtocol& proto);

// X lies in the constant-coefficient span of fields.
bool in_span(const std::vector<VectorField>& fields, const VectorField& X, std::uint64_t seed = kDefaultSeed);

}  // namespace paracr
