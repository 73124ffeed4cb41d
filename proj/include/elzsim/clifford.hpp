// Copyright 2026 The elzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "elzsim/errors.hpp"
#include "elzsim/qubit.hpp"
#include "elzsim/rng.hpp"

namespace elzsim {

/// Signed permutation matrix (row-major) acting on Bloch vectors.
using AxisMap = std::array<std::int8_t, 9>;

inline AxisMap multiply(const AxisMap& a, const AxisMap& b) {
    AxisMap c{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            int s = 0;
            for (int k = 0; k < 3; ++k) s += a[3 * i + k] * b[3 * k + j];
            c[3 * i + j] = static_cast<std::int8_t>(s);
        }
    }
    return c;
}

/// Ideal rotation of a primitive, read off the simulator's own gate so the
/// table and the dynamics share one convention.
inline AxisMap ideal_axis_map(Gate g) {
    QubitParams q;
    q.noise = NoiseModel::kNone;
    const Eigen::Matrix3d m = gate_rotation(g, q, 0.0);
    AxisMap out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) out[3 * i + j] = static_cast<std::int8_t>(std::lround(m(i, j)));
    }
    return out;
}

struct CliffordElement {
    int index = 0;
    AxisMap matrix{};
    /// Primitive gates applied first to last; empty for the identity.
    std::vector<Gate> decomposition;
};

/// The 24-element single-qubit Clifford group with a fixed compilation
/// into {±X, ±Y, X2, Y2}.
///
/// Elements are enumerated breadth-first from the identity, appending
/// generators in the order X, Y, -X, -Y, X2, Y2; each element keeps the
/// first (hence shortest) gate string that reaches it. Index 0 is the
/// identity.
class CliffordGroup {
public:
    static constexpr int kOrder = 24;

    CliffordGroup() {
        constexpr std::array<Gate, 6> generators = {Gate::kX, Gate::kMinusX, Gate::kY,
                                                    Gate::kMinusY, Gate::kX2, Gate::kY2};
        std::array<AxisMap, 6> gen_maps{};
        for (std::size_t i = 0; i < generators.size(); ++i) gen_maps[i] = ideal_axis_map(generators[i]);

        elements_.push_back({0, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {}});
        for (std::size_t head = 0; head < elements_.size(); ++head) {
            for (std::size_t g = 0; g < generators.size(); ++g) {
                const AxisMap m = multiply(gen_maps[g], elements_[head].matrix);
                if (find(m) >= 0) continue;
                CliffordElement e{static_cast<int>(elements_.size()), m, elements_[head].decomposition};
                e.decomposition.push_back(generators[g]);
                elements_.push_back(std::move(e));
            }
        }
        if (elements_.size() != kOrder) throw DomainError("Clifford enumeration did not close at 24 elements");
        for (int a = 0; a < kOrder; ++a) {
            for (int b = 0; b < kOrder; ++b) {
                const int c = find(multiply(elements_[b].matrix, elements_[a].matrix));
                if (c < 0) throw DomainError("Clifford group not closed under composition");
                then_[a][b] = c;
                if (c == 0) inverse_[a] = b;
            }
        }
        std::size_t total = 0;
        for (const auto& e : elements_) total += e.decomposition.size();
        average_generators_ = static_cast<double>(total) / kOrder;
    }

    const CliffordElement& operator[](int i) const { return elements_[static_cast<std::size_t>(i)]; }
    const std::vector<CliffordElement>& elements() const { return elements_; }

    /// Index of the element "apply a, then b".
    int then(int a, int b) const { return then_[a][b]; }
    int inverse(int a) const { return inverse_[a]; }

    /// Element implemented by a single primitive.
    int of_gate(Gate g) const {
        const int i = find(ideal_axis_map(g));
        if (i < 0) throw DomainError("gate is not a Clifford");
        return i;
    }

    int find(const AxisMap& m) const {
        for (const auto& e : elements_) {
            if (e.matrix == m) return e.index;
        }
        return -1;
    }

    double average_generators() const { return average_generators_; }

private:
    std::vector<CliffordElement> elements_;
    std::array<std::array<int, kOrder>, kOrder> then_{};
    std::array<int, kOrder> inverse_{};
    double average_generators_ = 0.0;
};

inline const CliffordGroup& clifford_group() {
    static const CliffordGroup group;
    return group;
}

inline const CliffordGroup& build_clifford_group() { return clifford_group(); }

/// Unbiased integer in [0, n) by rejection on raw engine output, so
/// sequences do not depend on the standard library's distributions.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
        const std::uint64_t v = rng();
        if (v < limit) return v % n;
    }
}

struct RbStep {
    enum class Kind : std::uint8_t { kGate, kEndClifford, kEndInterleaved };
    Kind kind = Kind::kGate;
    Gate gate = Gate::kI;
};

struct RbSequence {
    std::vector<int> cliffords;  // the m random elements
    std::optional<Gate> interleaved;
    int recovery = 0;
    std::vector<RbStep> steps;  // flattened program including boundaries

    std::size_t gate_count() const {
        std::size_t n = 0;
        for (const auto& s : steps) n += s.kind == RbStep::Kind::kGate;
        return n;
    }
};

/// m uniformly random Cliffords, each optionally followed by a fixed
/// interleaved gate, closed by the unique recovery element that makes the
/// ideal net action the identity.
inline RbSequence generate_rb_sequence(std::size_t m, Rng& rng, std::optional<Gate> interleaved = std::nullopt) {
    if (m == 0) throw DomainError("generate_rb_sequence: m must be at least 1");
    const auto& group = clifford_group();
    RbSequence seq;
    seq.interleaved = interleaved;
    const int inter = interleaved ? group.of_gate(*interleaved) : 0;
    int net = 0;
    auto emit_clifford = [&](int c) {
        for (Gate g : group[c].decomposition) seq.steps.push_back({RbStep::Kind::kGate, g});
        seq.steps.push_back({RbStep::Kind::kEndClifford, Gate::kI});
    };
    seq.cliffords.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const int c = static_cast<int>(uniform_index(rng, CliffordGroup::kOrder));
        seq.cliffords.push_back(c);
        emit_clifford(c);
        net = group.then(net, c);
        if (interleaved) {
            seq.steps.push_back({RbStep::Kind::kGate, *interleaved});
            seq.steps.push_back({RbStep::Kind::kEndInterleaved, Gate::kI});
            net = group.then(net, inter);
        }
    }
    seq.recovery = group.inverse(net);
    emit_clifford(seq.recovery);
    return seq;
}

}  // namespace elzsim
