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


#include "elzsim/clifford.hpp"

#include <set>

#include "gtest/gtest.h"

using namespace elzsim;

namespace {

QubitParams ideal() {
    QubitParams q;
    q.noise = NoiseModel::kNone;
    return q;
}

Eigen::Matrix3d product(const std::vector<Gate>& gates) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    for (Gate g : gates) m = gate_rotation(g, ideal(), 0.0) * m;
    return m;
}

Eigen::Matrix3d to_matrix(const AxisMap& a) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = a[3 * i + j];
    return m;
}

}  // namespace

TEST(CliffordGroup, has_24_distinct_signed_permutations) {
    const auto& g = clifford_group();
    ASSERT_EQ(g.elements().size(), 24u);
    std::set<AxisMap> seen;
    for (const auto& e : g.elements()) {
        seen.insert(e.matrix);
        const Eigen::Matrix3d m = to_matrix(e.matrix);
        EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
        EXPECT_NEAR((m.transpose() * m - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
    }
    EXPECT_EQ(seen.size(), 24u);
    EXPECT_TRUE(g[0].decomposition.empty());
}

TEST(CliffordGroup, decompositions_realise_their_elements) {
    for (const auto& e : clifford_group().elements()) {
        EXPECT_NEAR((product(e.decomposition) - to_matrix(e.matrix)).norm(), 0.0, 1e-12) << e.index;
        EXPECT_LE(e.decomposition.size(), 3u);
    }
}

TEST(CliffordGroup, closure_and_inverses) {
    const auto& g = clifford_group();
    for (int a = 0; a < 24; ++a) {
        for (int b = 0; b < 24; ++b) {
            const Eigen::Matrix3d ab = to_matrix(g[b].matrix) * to_matrix(g[a].matrix);
            EXPECT_NEAR((to_matrix(g[g.then(a, b)].matrix) - ab).norm(), 0.0, 0.0);
        }
        EXPECT_EQ(g.then(a, g.inverse(a)), 0);
        EXPECT_EQ(g.then(g.inverse(a), a), 0);
    }
}

TEST(CliffordGroup, average_generator_count) {
    // Breadth-first shortest words over {X, -X, Y, -Y, X2, Y2}: 1 identity,
    // 6 of length one, 13 of length two, 4 of length three.
    std::array<int, 4> hist{};
    for (const auto& e : clifford_group().elements()) ++hist[e.decomposition.size()];
    EXPECT_EQ(hist[0], 1);
    EXPECT_EQ(hist[1], 6);
    EXPECT_EQ(hist[2], 13);
    EXPECT_EQ(hist[3], 4);
    EXPECT_NEAR(clifford_group().average_generators(), 44.0 / 24.0, 1e-15);
}

TEST(CliffordGroup, primitive_gates_are_members) {
    const auto& g = clifford_group();
    EXPECT_EQ(g.of_gate(Gate::kI), 0);
    for (Gate x : kAllGates) {
        const int i = g.of_gate(x);
        EXPECT_NEAR((to_matrix(g[i].matrix) - gate_rotation(x, ideal(), 0.0)).norm(), 0.0, 1e-12);
    }
}

TEST(RbSequence, recovery_inverts_the_product) {
    Rng rng(99);
    for (std::size_t m : {1u, 2u, 3u, 17u, 256u, 4096u}) {
        for (int rep = 0; rep < 5; ++rep) {
            const auto seq = generate_rb_sequence(m, rng);
            ASSERT_EQ(seq.cliffords.size(), m);
            std::vector<Gate> gates;
            std::size_t ends = 0;
            for (const auto& s : seq.steps) {
                if (s.kind == RbStep::Kind::kGate) gates.push_back(s.gate);
                ends += s.kind == RbStep::Kind::kEndClifford;
            }
            EXPECT_EQ(ends, m + 1);
            EXPECT_EQ(gates.size(), seq.gate_count());
            const Eigen::Matrix3d net = product(gates);
            EXPECT_NEAR((net - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-9) << m;
        }
    }
    EXPECT_THROW(generate_rb_sequence(0, rng), DomainError);
}

TEST(RbSequence, interleaved_recovery) {
    Rng rng(5);
    for (Gate g : {Gate::kX, Gate::kX2, Gate::kMinusY, Gate::kI}) {
        const auto seq = generate_rb_sequence(64, rng, g);
        std::vector<Gate> gates;
        std::size_t inter = 0;
        for (const auto& s : seq.steps) {
            if (s.kind == RbStep::Kind::kGate) gates.push_back(s.gate);
            inter += s.kind == RbStep::Kind::kEndInterleaved;
        }
        EXPECT_EQ(inter, 64u);
        EXPECT_NEAR((product(gates) - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-9);
    }
}

TEST(RbSequence, noiseless_execution_returns_to_down) {
    Rng rng(7);
    const auto q = ideal();
    for (int rep = 0; rep < 50; ++rep) {
        const auto seq = generate_rb_sequence(1 + rep * 20, rng);
        QubitState s = QubitState::down();
        for (const auto& st : seq.steps) {
            if (st.kind == RbStep::Kind::kGate) s = apply_gate(s, st.gate, q, 0.0);
        }
        EXPECT_NEAR(s.p_up(), 0.0, 1e-9);
    }
}

TEST(RbSequence, draws_are_uniform) {
    Rng rng(11);
    std::array<int, 24> counts{};
    const int n = 240000;
    for (int i = 0; i < n; ++i) ++counts[uniform_index(rng, 24)];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - n / 24.0) * (c - n / 24.0) / (n / 24.0);
    // 23 degrees of freedom; the 99.9% quantile is 49.7.
    EXPECT_LT(chi2, 49.7);
}
