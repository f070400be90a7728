#include <doctest.h>

#include <cmath>
#include <vector>

#include "relgnn/gradcheck.hpp"
#include "relgnn/ops.hpp"
#include "relgnn/recurrent.hpp"
#include "relgnn/tensor.hpp"

using namespace relgnn;
namespace o = relgnn::ops;

namespace {

std::vector<real> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

Tensor random_tensor(Rng& rng, Shape shape) {
  std::vector<real> v(shape_numel(shape));
  for (real& x : v) x = static_cast<real>(rng.normal());
  return Tensor::from(std::move(shape), std::move(v), true);
}

}  // namespace

TEST_CASE("matmul") {
  const Tensor id = Tensor::matrix({{1, 0}, {0, 1}});
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}});
  CHECK(vals(o::matmul(id, m)) == vals(m));
  CHECK(o::matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})).item() == 11);

  Tensor a = Tensor::matrix({{1, 0}, {0, 1}}, true);
  Tensor b = Tensor::matrix({{2, 0}, {0, 2}}, true);
  backward(o::sum(o::matmul(a, b)));
  CHECK(std::vector<real>(a.grad().begin(), a.grad().end()) == std::vector<real>{2, 2, 2, 2});
  // Central differences of the same loss.
  CHECK(finite_difference_check([&] { return o::sum(o::matmul(a, b)); }, {a, b}) < 1e-8);

  try {
    o::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3] and [2x3]") != std::string::npos);
  }
}

TEST_CASE("segment_sum") {
  const std::vector<std::size_t> ids = {0, 0, 1};
  CHECK(vals(o::segment_sum(Tensor::matrix({{1}, {2}, {3}}), ids, 2)) == std::vector<real>{3, 3});
  const std::vector<std::size_t> ones = {1, 1};
  CHECK(vals(o::segment_sum(Tensor::matrix({{1}, {2}}), ones, 3)) == std::vector<real>{0, 3, 0});

  Tensor data = Tensor::matrix({{0}, {0}, {0}}, true);
  const std::vector<std::size_t> back_ids = {0, 1, 1};
  const Tensor weights = Tensor::matrix({{1}, {10}});
  backward(o::sum(o::mul(o::segment_sum(data, back_ids, 2), weights)));
  CHECK(std::vector<real>(data.grad().begin(), data.grad().end()) == std::vector<real>{1, 10, 10});

  const std::vector<std::size_t> bad = {0, 3};
  CHECK_THROWS_AS(o::segment_sum(Tensor::matrix({{1}, {2}}), bad, 3), IndexError);

  SUBCASE("equals the one-hot indicator product on integer data") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t e = 1 + rng.uniform_index(12), n = 1 + rng.uniform_index(5), d = 1 + rng.uniform_index(4);
      std::vector<std::size_t> seg(e);
      std::vector<real> x(e * d);
      for (auto& s : seg) s = rng.uniform_index(n);
      for (auto& v : x) v = static_cast<real>(static_cast<int>(rng.uniform_index(21)) - 10);
      std::vector<real> s_t(n * e, 0);
      for (std::size_t r = 0; r < e; ++r) s_t[seg[r] * e + r] = 1;
      const Tensor data_t = Tensor::from({e, d}, x);
      const Tensor dense = o::matmul(Tensor::from({n, e}, s_t), data_t);
      CHECK(vals(o::segment_sum(data_t, seg, n)) == vals(dense));
    }
  }
}

TEST_CASE("segment_softmax") {
  const std::vector<std::size_t> pair = {0, 0};
  CHECK(vals(o::segment_softmax(Tensor::vector({0, 0}), pair, 1)) == std::vector<real>{0.5, 0.5});
  const std::vector<std::size_t> single = {0};
  CHECK(o::segment_softmax(Tensor::vector({37.5}), single, 1).at(0) == 1.0);
  const auto p = vals(o::segment_softmax(Tensor::vector({1, 2}), pair, 1));
  CHECK(p[0] == doctest::Approx(1 / (1 + std::exp(1.0))).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(std::exp(1.0) / (1 + std::exp(1.0))).epsilon(1e-14));

  const std::vector<std::size_t> gap = {0, 0, 2};
  CHECK_THROWS_AS(o::segment_softmax(Tensor::vector({1, 2, 3}), gap, 3, true), ContractError);

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(4);
    std::vector<std::size_t> seg;
    std::vector<real> logits;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t k = 1 + rng.uniform_index(5);
      for (std::size_t i = 0; i < k; ++i) {
        seg.push_back(s);
        logits.push_back(static_cast<real>(10 * rng.normal()));
      }
    }
    const Tensor l = Tensor::from({logits.size()}, logits);
    const auto out = vals(o::segment_softmax(l, seg, n, true));
    std::vector<double> total(n, 0);
    for (std::size_t i = 0; i < out.size(); ++i) total[seg[i]] += out[i];
    for (double t : total) CHECK(std::abs(t - 1) < 1e-12);
    // Shift segment 0 by a constant.
    std::vector<real> shifted = logits;
    for (std::size_t i = 0; i < seg.size(); ++i)
      if (seg[i] == 0) shifted[i] += 123.25;
    const auto out2 = vals(o::segment_softmax(Tensor::from({shifted.size()}, shifted), seg, n, true));
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - out2[i]) < 1e-12);
  }
}

TEST_CASE("elementwise") {
  CHECK(vals(o::elementwise("tanh", Tensor::zeros({2, 2}))) == std::vector<real>{0, 0, 0, 0});
  CHECK(o::elementwise("leaky_relu", Tensor::scalar(-1)).item() == doctest::Approx(-0.2).epsilon(1e-15));
  const Tensor b = Tensor::vector({3, 4});
  CHECK(vals(o::elementwise("hadamard", Tensor::vector({1, 2}), &b)) == std::vector<real>{3, 8});
  CHECK_THROWS_AS(o::elementwise("softplus", Tensor::vector({1})), std::invalid_argument);
  const Tensor c = Tensor::vector({1, 2, 3});
  CHECK_THROWS_AS(o::elementwise("add", Tensor::zeros({2, 2}), &c), DimensionError);
  // Row-vector broadcast along the leading axis.
  const Tensor row = Tensor::vector({10, 20});
  CHECK(vals(o::add(Tensor::matrix({{1, 2}, {3, 4}}), row)) == std::vector<real>{11, 22, 13, 24});
}

TEST_CASE("layer_norm") {
  const Tensor gain = Tensor::vector({1, 1, 1}), bias = Tensor::vector({0, 0, 0});
  CHECK(vals(o::layer_norm(Tensor::matrix({{5, 5, 5}}), gain, bias)) == std::vector<real>{0, 0, 0});
  const auto two = vals(o::layer_norm(Tensor::matrix({{1, 3}}), Tensor::vector({1, 1}), Tensor::vector({0, 0})));
  CHECK(two[0] == doctest::Approx(-1 / std::sqrt(1 + 1e-5)).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(1 / std::sqrt(1 + 1e-5)).epsilon(1e-14));
  const auto zero_gain = vals(o::layer_norm(Tensor::matrix({{1, 7, 2}, {4, 0, 9}}), Tensor::vector({0, 0, 0}),
                                            Tensor::vector({0.5, -1, 2})));
  CHECK(zero_gain == std::vector<real>{0.5, -1, 2, 0.5, -1, 2});
}

TEST_CASE("dropout") {
  Rng rng(1);
  const Tensor x = Tensor::matrix({{1, 2}, {3, 4}});
  CHECK(vals(o::dropout(x, 1.0, rng, true)) == vals(x));
  CHECK(vals(o::dropout(x, 0.5, rng, false)) == vals(x));
  CHECK_THROWS_AS(o::dropout(x, 0.0, rng, true), std::invalid_argument);
  CHECK_THROWS_AS(o::dropout(x, 1.5, rng, true), std::invalid_argument);
  const Tensor ones = Tensor::full({1000, 1000}, 1);
  CHECK(o::mean(o::dropout(ones, 0.9, rng, true)).item() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("recurrent_cell") {
  ParameterStore store;
  Rng rng(3);
  add_recurrent_params(store, "gru/", RecurrentKind::GRU, 3, 3, rng);
  const Tensor h = Tensor::matrix({{0.3, -0.7, 1.1}, {2.0, 0.1, -0.4}});
  const Tensor m = Tensor::matrix({{1.5, -2.0, 0.2}, {0.0, 0.9, 4.0}});
  // Update-gate block is columns [d, 2d) of the bias.
  for (std::size_t j = 3; j < 6; ++j) store.get("gru/bias").values()[j] = 50;
  const auto saturated = recurrent_cell({h, std::nullopt}, m, recurrent_params_from(store, "gru/", RecurrentKind::GRU));
  for (std::size_t i = 0; i < h.numel(); ++i) CHECK(std::abs(saturated.hidden.values()[i] - h.values()[i]) < 1e-3);

  ParameterStore rnn;
  add_recurrent_params(rnn, "rnn/", RecurrentKind::RNN, 3, 3, rng);
  for (auto& [name, t] : rnn)
    for (auto& x : t.values()) x = 0;
  const auto zero = recurrent_cell({h, std::nullopt}, m, recurrent_params_from(rnn, "rnn/", RecurrentKind::RNN));
  CHECK(vals(zero.hidden) == std::vector<real>(6, 0));

  CHECK_THROWS_AS(recurrent_kind_from_name("QRNN"), std::invalid_argument);

  for (RecurrentKind kind : {RecurrentKind::RNN, RecurrentKind::GRU, RecurrentKind::LSTM}) {
    ParameterStore p;
    Rng init(9);
    add_recurrent_params(p, "r/", kind, 3, 3, init);
    for (auto& [name, t] : p)
      for (auto& x : t.values()) x = static_cast<real>(0.5 * init.normal());
    Tensor hs = h.clone(), ms = m.clone();
    hs.set_requires_grad(true);
    ms.set_requires_grad(true);
    const Tensor proj = Tensor::matrix({{0.2, -1, 0.7}, {1.3, 0.4, -0.6}});
    auto loss = [&] {
      return o::sum(o::mul(recurrent_cell({hs, std::nullopt}, ms, recurrent_params_from(p, "r/", kind)).hidden, proj));
    };
    CHECK(gradient_check(loss, p).max_error < 1e-4);
    CHECK(finite_difference_check(loss, {hs, ms}) < 1e-4);
  }
}

TEST_CASE("backward and finite differences") {
  Tensor x = Tensor::vector({1, 2, 3}, true);
  backward(o::sum(x));
  CHECK(std::vector<real>(x.grad().begin(), x.grad().end()) == std::vector<real>{1, 1, 1});
  Tensor y = Tensor::vector({1, 2}, true);
  backward(o::sum(o::mul(y, y)));
  CHECK(std::vector<real>(y.grad().begin(), y.grad().end()) == std::vector<real>{2, 4});
  CHECK_THROWS_AS(backward(o::mul(y, y)), DimensionError);
}

TEST_CASE("finite differences agree with backward for every op") {
  // 100 seeded trials cycling through the differentiable ops.
  Rng root(2024);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = root.split(static_cast<std::uint64_t>(trial));
    const std::size_t n = 2 + rng.uniform_index(3), d = 1 + rng.uniform_index(3);
    Tensor a = random_tensor(rng, {n, d});
    Tensor b = random_tensor(rng, {n, d});
    Tensor w = random_tensor(rng, {d, 3});
    Tensor row = random_tensor(rng, {d});
    Tensor gain = random_tensor(rng, {d});
    Tensor logits = random_tensor(rng, {n});
    Tensor mats = random_tensor(rng, {n, d * d});
    std::vector<std::size_t> ids(n), gather(n + 1);
    for (auto& s : ids) s = rng.uniform_index(2);
    ids[0] = 0;
    ids[1] = 1;
    for (auto& s : gather) s = rng.uniform_index(n);
    const Tensor target = Tensor::from({n, d}, std::vector<real>(n * d, 0.5));
    const Tensor soft_target = o::sigmoid(b).detach();

    std::vector<std::function<Tensor()>> fns = {
        [&] { return o::sum(o::matmul(a, w)); },
        [&] { return o::sum(o::mul(o::add(a, row), b)); },
        [&] { return o::sum(o::mul(o::sub(a, b), a)); },
        [&] { return o::sum(o::mul(o::affine(a, 1.7, -0.3), b)); },
        [&] { return o::sum(o::mul(o::relu(a), b)); },
        [&] { return o::sum(o::mul(o::leaky_relu(a), b)); },
        [&] { return o::sum(o::mul(o::elu(a), b)); },
        [&] { return o::sum(o::mul(o::gelu(a), b)); },
        [&] { return o::sum(o::mul(o::tanh(a), b)); },
        [&] { return o::sum(o::mul(o::sigmoid(a), b)); },
        [&] { return o::sum(o::mul(o::linear(a, w, nullptr), o::matmul(b, w))); },
        [&] { return o::sum(o::mul(o::gather_rows(a, gather), o::gather_rows(b, gather))); },
        [&] { return o::sum(o::mul(o::segment_sum(a, ids, 2), o::segment_sum(b, ids, 2))); },
        [&] { return o::sum(o::mul(o::scale_rows(a, o::segment_softmax(logits, ids, 2, true)), b)); },
        [&] {
          const Tensor parts[] = {a, b};
          return o::sum(o::mul(o::concat_cols(parts), o::concat_cols(parts)));
        },
        [&] {
          const Tensor parts[] = {a, b};
          return o::sum(o::tanh(o::concat_rows(parts)));
        },
        [&] { return o::sum(o::mul(o::slice_cols(a, 0, 1), o::slice_cols(b, d - 1, 1))); },
        [&] { return o::sum(o::mul(o::slice_rows(a, 1, n - 1), o::slice_rows(b, 0, n - 1))); },
        [&] { return o::sum(o::mul(o::reshape(a, {n * d}), o::reshape(b, {n * d}))); },
        [&] { return o::sum(o::mul(o::batched_vecmat(a, mats), b)); },
        [&] { return o::sum(o::mul(o::layer_norm(a, gain, row), b)); },
        [&] { return o::mean(o::mul(a, b)); },
        [&] { return o::bce_with_logits(a, soft_target); },
        [&] { return o::mse(a, target); },
    };
    const auto& f = fns[static_cast<std::size_t>(trial) % fns.size()];
    worst = std::max(worst, finite_difference_check(f, {a, b, w, row, gain, logits, mats}));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("repeated forward and backward is bitwise identical") {
  auto run = [] {
    Rng rng(77);
    Tensor a = random_tensor(rng, {4, 3});
    Tensor w = random_tensor(rng, {3, 3});
    Tensor loss = o::sum(o::tanh(o::matmul(a, w)));
    backward(loss);
    std::vector<real> out = {loss.item()};
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  CHECK(run() == run());
}
