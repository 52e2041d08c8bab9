#include <gtest/gtest.h>

#include "support.hpp"

using namespace mbc;
using testing_support::random_vector;

TEST(States, InternalVectorsAreNormalized) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    InternalVector v(random_vector(5, rng) * 7.5);
    EXPECT_NEAR(v.components().norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(InternalVector(CVector::Zero(3)), InvalidArgument);
}

TEST(States, SeparableConstruction) {
  const auto e0 = InternalVector::basis(3, 0);
  const auto same = make_separable(Statistics::Boson, {3, 3}, {0, 1, 2}, {e0, e0, e0});
  EXPECT_EQ(same.particles(), 3);
  EXPECT_NEAR(std::abs(same.gram().sum() - complex(9.0)), 0.0, 1e-12);

  const auto dist = make_separable(Statistics::Fermion, {3, 3}, {0, 1, 2},
                                   {InternalVector::basis(3, 0), InternalVector::basis(3, 1), InternalVector::basis(3, 2)});
  EXPECT_LT((dist.gram() - CMatrix::Identity(3, 3)).norm(), 1e-12);

  EXPECT_THROW(make_separable(Statistics::Boson, {3, 3}, {0, 0, 1}, {e0, e0, e0}), InvalidArgument);
  EXPECT_THROW(make_separable(Statistics::Boson, {3, 3}, {0, 1, 3}, {e0, e0, e0}), InvalidArgument);
  EXPECT_THROW(make_separable(Statistics::Boson, {3, 2}, {0, 1}, {e0, e0}), InvalidArgument);
  EXPECT_THROW(make_separable(Statistics::Boson, {3, 3}, {0, 1}, {e0}), InvalidArgument);
}

TEST(States, ModesAreSortedWithTheirVectors) {
  const auto a = InternalVector::basis(2, 0), b = InternalVector::basis(2, 1);
  const auto s = make_separable(Statistics::Boson, {4, 2}, {3, 1}, {a, b});
  EXPECT_EQ(s.modes(), (std::vector<int>{1, 3}));
  EXPECT_NEAR(std::abs(s.internal_states()[0].components()(1)), 1.0, 1e-15);
}

TEST(States, EntangledExamplesAreNormalized) {
  for (auto st : {Statistics::Boson, Statistics::Fermion}) {
    EXPECT_NEAR(make_psi2(st).norm_squared(), 1.0, 1e-12);
    EXPECT_NEAR(make_psi3(st).norm_squared(), 1.0, 1e-12);
    EXPECT_EQ(make_psi3(st).terms().size(), 3u);
  }
  EXPECT_THROW(make_psi2(Statistics::Boson, {2, 1}), InvalidArgument);
  EXPECT_THROW(make_psi3(Statistics::Boson, {2, 3}), InvalidArgument);
}

TEST(States, SuperpositionMergesAndNormalizes) {
  const auto s = make_superposition(Statistics::Boson, {2, 2}, {0, 1}, {{1.0, {0, 1}}, {1.0, {0, 1}}, {1.0, {1, 1}}});
  EXPECT_EQ(s.terms().size(), 2u);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
  EXPECT_THROW(make_superposition(Statistics::Boson, {2, 2}, {0, 1}, {{1.0, {0, 1}}, {-1.0, {0, 1}}}), InvalidArgument);
  EXPECT_THROW(make_superposition(Statistics::Boson, {2, 2}, {0, 1}, {{1.0, {0, 2}}}), InvalidArgument);
}

TEST(States, FermionReorderingFlipsSign) {
  const auto s = make_superposition(Statistics::Fermion, {2, 2}, {1, 0}, {{1.0, {0, 1}}});
  EXPECT_EQ(s.modes(), (std::vector<int>{0, 1}));
  EXPECT_EQ(s.terms()[0].labels, (std::vector<int>{1, 0}));
  EXPECT_NEAR(s.terms()[0].amplitude.real(), -1.0, 1e-15);
  const auto b = make_superposition(Statistics::Boson, {2, 2}, {1, 0}, {{1.0, {0, 1}}});
  EXPECT_NEAR(b.terms()[0].amplitude.real(), 1.0, 1e-15);
}

TEST(States, JsonRoundTrip) {
  std::mt19937_64 rng(5);
  const State sep = testing_support::random_separable(Statistics::Fermion, 3, 4, 3, rng);
  const State back = io::state_from_json(io::state_to_json(sep));
  EXPECT_NEAR(mean_coherence(back, 2), mean_coherence(sep, 2), 1e-14);

  const State sup = make_psi3(Statistics::Boson);
  const State back2 = io::state_from_json(io::state_to_json(sup));
  EXPECT_NEAR(mean_coherence(back2, 3), 3.0, 1e-12);

  EXPECT_THROW(io::state_from_json(nlohmann::json::parse(R"({"statistics":"anyon"})")), InvalidArgument);
  EXPECT_THROW(io::state_from_json(nlohmann::json::parse(
                   R"({"statistics":"boson","d_ext":2,"d_int":1,"modes":[0]})")),
               InvalidArgument);
}

TEST(States, UnitaryJson) {
  const auto u = sample_haar(3, 9);
  const auto back = io::unitary_from_json(io::unitary_to_json(u));
  EXPECT_LT((back.matrix() - u.matrix()).norm(), 1e-15);
  EXPECT_THROW(io::unitary_from_json(nlohmann::json::parse("[[[1,0],[1,0]],[[0,0],[1,0]]]")), InvalidArgument);
}
