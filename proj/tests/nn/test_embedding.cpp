#include <cmath>
#include <set>

#include "alphaembed/errors.hpp"
#include "alphaembed/nn/embedding.hpp"
#include "alphaembed/nn/loss.hpp"
#include "alphaembed/nn/model.hpp"
#include "torch_support.hpp"

using namespace alphaembed;
using namespace alphaembed::nn;

TEST_CASE("row normalization") {
  const auto out = l2_normalize_rows(torch::tensor({{3.0, 4.0}, {0.0, 1.0}}));
  CHECK(out[0][0].item<double>() == doctest::Approx(0.6));
  CHECK(out[0][1].item<double>() == doctest::Approx(0.8));
  CHECK(out[1][1].item<double>() == 1.0);
  CHECK_THROWS_AS(l2_normalize_rows(torch::tensor({{1.0, 1.0}, {0.0, 0.0}})), NormalizationError);
}

TEST_CASE("assembling the embedding matrix") {
  SUBCASE("worked example") {
    const auto L = torch::tensor({{3.0, 4.0}});
    const auto alpha = torch::tensor({{1.0, 0.0}});
    const auto betas = torch::tensor({{2.0}, {-5.0}});
    const auto U = assemble_matrix(L, alpha, betas, NormFlags{true, true});
    const double h = std::sqrt(2.0) / 2;
    const auto expected = torch::tensor({{0.6, 0.8, 0.0}, {h, 0.0, h}, {h, 0.0, -h}});
    CHECK(torch::allclose(U, expected, 0, 1e-12));
  }
  SUBCASE("degenerate reduction") {
    const auto L = torch::randn({4, 3}, torch::kFloat64);
    const auto U = assemble_matrix(L, torch::randn({1, 3}, torch::kFloat64),
                                   torch::empty({0, 0}, torch::kFloat64), {false, false});
    CHECK(torch::equal(U, L));
  }
  SUBCASE("normalized sub-blocks") {
    const auto L = torch::randn({3, 5});
    const auto alpha = torch::randn({1, 5}) * 7;
    const auto betas = torch::randn({4, 3}) * 0.1;
    const auto U = assemble_matrix(L, alpha, betas, {true, false});
    const auto a_norm = U.narrow(0, 3, 4).narrow(1, 0, 5).norm(2, 1);
    const auto b_norm = U.narrow(0, 3, 4).narrow(1, 5, 3).norm(2, 1);
    CHECK(torch::allclose(a_norm, torch::ones({4}), 0, 1e-6));
    CHECK(torch::allclose(b_norm, torch::ones({4}), 0, 1e-6));
  }
  CHECK_THROWS_AS(assemble_matrix(torch::ones({1, 2}), torch::ones({1, 2}), torch::zeros({1, 2}),
                                  {true, true}),
                  NormalizationError);
}

TEST_CASE("beta resampling and freezing") {
  Rng rng(5);
  DualPartEmbedding e(3, 5, 8, RandMethod(RandKind::HypercubeVertices, 32), NormFlags{true, true});
  e->resample_betas(rng);
  const auto first = e->betas().clone();
  e->resample_betas(rng);
  CHECK_FALSE(torch::equal(first, e->betas()));

  e->freeze_for_inference(rng);
  CHECK(e->mode() == EmbeddingMode::Inference);
  CHECK(torch::equal(e->matrix(), e->matrix()));
  CHECK_THROWS_AS(e->resample_betas(rng), ModeError);

  DualPartEmbedding other(3, 5, 8, RandMethod(RandKind::HypercubeVertices, 32), NormFlags{true, true});
  Rng other_rng(6);
  other->freeze_for_inference(other_rng);
  CHECK_FALSE(torch::equal(other->betas(), e->betas()));

  DualPartEmbedding empty(3, 0, 4, RandMethod(RandKind::NormalDistribution, 4), NormFlags{true, true});
  CHECK_NOTHROW(empty->resample_betas(rng));
  CHECK(empty->matrix().size(0) == 3);
}

TEST_CASE("median candidate selection") {
  CHECK(select_median_candidate({0.7}) == 0);
  CHECK(select_median_candidate({0.9, 0.1, 0.5}) == 2);
  // Sorted: 0.1(3) 0.2(7) 0.3(0) 0.4(9) 0.5(5) 0.6(1) 0.7(8) 0.8(2) 0.9(6) 1.0(4)
  const std::vector<double> ten{0.3, 0.6, 0.8, 0.1, 1.0, 0.5, 0.9, 0.2, 0.7, 0.4};
  CHECK(select_median_candidate(ten) == 5);
  CHECK_THROWS_AS(select_median_candidate({}), DataError);

  Rng rng(9);
  DualPartEmbedding e(3, 4, 4, RandMethod(RandKind::NormalDistribution, 4), NormFlags{true, true});
  std::vector<double> seen;
  const double chosen = select_median_embedding(*e, 5, rng, [&] {
    seen.push_back(e->betas().sum().item<double>());
    return seen.back();
  });
  auto sorted = seen;
  std::sort(sorted.begin(), sorted.end());
  CHECK(chosen == sorted[2]);
  CHECK(e->betas().sum().item<double>() == doctest::Approx(sorted[2]));
  CHECK(e->mode() == EmbeddingMode::Inference);
}

TEST_CASE("projection") {
  const auto U = l2_normalize_rows(torch::randn({6, 4}, torch::kFloat64));
  const auto logits = project(U, U[2] * 3.0, true);
  CHECK(logits[2].item<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((logits.abs() <= 1.0 + 1e-12).all().item<bool>());

  const auto basis = torch::eye(4, torch::kFloat64);
  CHECK(std::abs(project(basis, basis[1], true)[0].item<double>()) < 1e-12);

  const auto v = torch::randn({4}, torch::kFloat64);
  CHECK(torch::allclose(project(U, v * 2, false), project(U, v, false) * 2));
  CHECK_THROWS_AS(project(U, torch::zeros({4}, torch::kFloat64), true), NormalizationError);

  const auto batch = torch::randn({3, 5, 4}, torch::kFloat64);
  CHECK(torch::allclose(project(U, batch, true), project(U, batch, true, true)));
}

TEST_CASE("three-way tying") {
  const auto v = Vocabulary({"x"}, 3);
  ModelConfig c;
  c.d_model = 16;
  c.heads = 2;
  c.layers = 1;
  c.fc_size = 16;
  EmbeddingConfig dual;
  dual.method = RandMethod(RandKind::HypercubeVertices, 4);
  Seq2Seq model(c, dual, v);
  Rng rng(3);
  model->table().begin_step(rng);
  const auto matrix = model->table().matrix();
  CHECK(model->output_matrix(matrix).is_same(matrix));

  // Moving alpha moves every interchangeable row the same way for all uses.
  {
    torch::NoGradGuard g;
    model->dual_part()->alpha.add_(0.5);
  }
  const auto moved = model->table().matrix();
  CHECK_FALSE(torch::equal(moved.narrow(0, 4, 3), matrix.narrow(0, 4, 3)));
  CHECK(torch::equal(moved.narrow(0, 0, 4), matrix.narrow(0, 0, 4)));

  auto untied = c;
  untied.tie_embeddings = false;
  CHECK_THROWS_AS(Seq2Seq(untied, dual, v), ConfigError);

  EmbeddingConfig base;
  base.kind = EmbeddingKind::Baseline;
  base.flags = {false, false};
  Seq2Seq baseline(c, base, v);
  const auto table = baseline->table().matrix();
  CHECK(torch::equal(baseline->output_matrix(table), table));
  CHECK_NOTHROW(Seq2Seq(untied, base, v));
}

TEST_CASE("baseline AP shuffling touches only interchangeable rows") {
  BaselineEmbedding e(4, 6, 8, BaselineAugmentation::ShuffleAPs, false);
  Rng rng(11);
  e->begin_step(rng);
  const auto shuffled = e->matrix();
  CHECK(torch::equal(shuffled.narrow(0, 0, 4), e->table.narrow(0, 0, 4)));
  std::set<double> before, after;
  for (int i = 4; i < 10; ++i) {
    before.insert(e->table[i].sum().item<double>());
    after.insert(shuffled[i].sum().item<double>());
  }
  CHECK(before == after);
  e->freeze_for_inference(rng);
  CHECK(torch::equal(e->matrix(), e->table));
}

TEST_CASE("gradients through assembly, projection and AdaCos") {
  torch::manual_seed(21);
  std::mt19937_64 gen(21);
  for (int instance = 0; instance < 20; ++instance) {
    const int n = 1 + static_cast<int>(gen() % 4);
    const int m = 1 + static_cast<int>(gen() % 3);
    const int d_beta = 1 + static_cast<int>(gen() % 3);
    const int d_alpha = 1 + static_cast<int>(gen() % (8 - d_beta));
    const int positions = 1 + static_cast<int>(gen() % 4);
    const NormFlags flags{(gen() & 1) != 0, true};
    auto L = torch::randn({n, d_alpha}, torch::kFloat64);
    auto alpha = torch::randn({1, d_alpha}, torch::kFloat64);
    const auto betas = torch::randn({m, d_beta}, torch::kFloat64);
    auto v = torch::randn({positions, d_alpha + d_beta}, torch::kFloat64);
    const auto targets = torch::randint(n + m, {positions}, torch::kInt64);
    const auto mask = torch::ones({positions}, torch::kBool);
    const auto state = adacos_init(n + m);

    auto loss_of = [&](const torch::Tensor& Lx, const torch::Tensor& ax, const torch::Tensor& vx) {
      auto s = state;
      return adacos_step(project(assemble_matrix(Lx, ax, betas, flags), vx, true), targets, mask, s).loss;
    };
    for (auto* t : {&L, &alpha, &v}) t->requires_grad_(true);
    loss_of(L, alpha, v).backward();
    for (auto* t : {&L, &alpha, &v}) {
      const auto analytic = t->grad().clone();
      const auto numeric = testing::central_difference(
          [&](const torch::Tensor& x) {
            torch::NoGradGuard g;
            if (t == &L) return loss_of(x, alpha, v).item<double>();
            if (t == &alpha) return loss_of(L, x, v).item<double>();
            return loss_of(L, alpha, x).item<double>();
          },
          t->detach());
      CHECK(testing::max_relative_error(analytic, numeric) < 1e-4);
    }
  }
}
