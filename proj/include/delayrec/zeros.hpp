#pragma once

#include <string_view>
#include <vector>

#include "delayrec/model.hpp"

namespace delayrec::zeros {

/// Z(s) = s E - F with E = [[I_n, 0], [0, 0]] and F = [[A, -H], [-C, 0]], both (n+l) x (n+p).
struct Pencil {
    Matrix E;
    Matrix F;
};

enum class ZeroClass { NoZeros, AllInsideUnitCircle, OnUnitCircle, OutsideUnitCircle };

std::string_view to_string(ZeroClass c);

struct InvariantZero {
    Complex value;
    int multiplicity = 1;
};

struct ZeroReport {
    std::vector<InvariantZero> zeros;
    int normal_rank = 0;
    ZeroClass classification = ZeroClass::NoZeros;

    /// Zeros repeated according to multiplicity.
    std::vector<Complex> expanded() const;
    int total_multiplicity() const;
};

Pencil rosenbrock_pencil(const SystemModel& model);

/// Z(s) evaluated at a complex point.
ComplexMatrix rosenbrock_matrix(const SystemModel& model, Complex s);

/// Max rank of Z(s) over random sample points of modulus in [1.5, 3] kept away from eig(A).
int normal_rank(const SystemModel& model);

/// Finite points where Z loses rank. Throws PencilDegenerate when normal rank < n + p.
ZeroReport invariant_zeros(const SystemModel& model);

ZeroClass classify_zeros(const ZeroReport& report);

} // namespace delayrec::zeros
