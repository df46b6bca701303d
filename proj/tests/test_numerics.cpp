#include <doctest.h>

#include <cmath>
#include <vector>

#include "dkpc/graph.hpp"
#include "dkpc/optim.hpp"

using namespace dkpc;

TEST_CASE("matmul identity and selection") {
  Graph g;
  NodeId eye = g.constant({2, 2}, {1, 0, 0, 1});
  NodeId m = g.constant({2, 2}, {1, 2, 3, 4});
  NodeId out = g.matmul(eye, m);
  CHECK(g.value(out) == std::vector<double>{1, 2, 3, 4});

  NodeId a = g.constant({1, 2}, {1, 0});
  NodeId b = g.constant({2, 1}, {0, 5});
  NodeId sel = g.matmul(a, b);
  CHECK(g.value(sel) == std::vector<double>{0});

  NodeId bad = g.constant({3, 1}, {1, 2, 3});
  CHECK_THROWS_AS(g.matmul(m, bad), DimensionError);
}

TEST_CASE("matmul gradient matches central finite differences") {
  Rng rng(7);
  Parameter a("a", Tensor::uniform({3, 4}, rng, -1, 1));
  Parameter b("b", Tensor::uniform({4, 2}, rng, -1, 1));
  std::vector<Parameter*> params{&a, &b};
  auto loss_fwd = [&] {
    Graph g;
    return g.scalar(g.sum_all(g.matmul(g.param(a), g.param(b))));
  };
  auto loss_bwd = [&] {
    a.zero_grad();
    b.zero_grad();
    Graph g;
    NodeId l = g.sum_all(g.matmul(g.param(a), g.param(b)));
    g.backward(l);
    return g.scalar(l);
  };
  auto report = check_gradients(params, loss_bwd, loss_fwd, 1e-3);
  CHECK(report.coords_checked == 20);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("softmax basics") {
  Graph g;
  NodeId sym = g.softmax(g.constant({3}, {0, 0, 0}));
  for (double v : g.value(sym)) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // stability limit: no overflow, saturates to [1, 0]
  NodeId hot = g.softmax(g.constant({2}, {1000, 0}));
  CHECK(g.value(hot)[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.value(hot)[1] == doctest::Approx(0.0).epsilon(1e-6));

  // high-precision oracle for [1,2,3]
  long double e1 = expl(1.0L), e2 = expl(2.0L), e3 = expl(3.0L);
  long double z = e1 + e2 + e3;
  NodeId sm = g.softmax(g.constant({3}, {1, 2, 3}));
  CHECK(g.value(sm)[0] == doctest::Approx(static_cast<double>(e1 / z)).epsilon(1e-12));
  CHECK(g.value(sm)[1] == doctest::Approx(static_cast<double>(e2 / z)).epsilon(1e-12));
  CHECK(g.value(sm)[2] == doctest::Approx(static_cast<double>(e3 / z)).epsilon(1e-12));

  CHECK_THROWS_AS(g.softmax(g.constant({0}, {})), DimensionError);
}

TEST_CASE("softmax outputs are probability vectors and shift-invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(5);
    for (auto& x : v) x = rng.uniform(-50, 50);
    Graph g;
    NodeId s = g.softmax(g.constant({5}, v));
    double sum = 0.0;
    for (double p : g.value(s)) {
      CHECK(p > 0.0);
      CHECK(p <= 1.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

    std::vector<double> shifted = v;
    for (auto& x : shifted) x += 123.0;
    NodeId s2 = g.softmax(g.constant({5}, shifted));
    for (int i = 0; i < 5; ++i)
      CHECK(g.value(s2)[i] == doctest::Approx(g.value(s)[i]).epsilon(1e-9));
  }
}

TEST_CASE("elementwise ops") {
  Graph g;
  NodeId t = g.tanh(g.constant({1}, {0}));
  CHECK(g.scalar(t) == 0.0);
  g.backward(t);
  CHECK(g.grad(NodeId{0})[0] == doctest::Approx(1.0));  // d tanh/dx at 0

  NodeId a = g.constant({2}, {1, 2});
  NodeId b = g.constant({3}, {3, 4, 5});
  NodeId cat = g.concat(a, b);
  CHECK(g.value(cat) == std::vector<double>{1, 2, 3, 4, 5});

  NodeId bad = g.constant({3}, {1, 2, 3});
  CHECK_THROWS_AS(g.add(a, bad), DimensionError);
}

TEST_CASE("sigmoid gradient vs finite differences") {
  Rng rng(3);
  Parameter w("w", Tensor::uniform({6}, rng, -2, 2));
  std::vector<Parameter*> params{&w};
  auto fwd = [&] {
    Graph g;
    return g.scalar(g.sum_all(g.sigmoid(g.param(w))));
  };
  auto bwd = [&] {
    w.zero_grad();
    Graph g;
    NodeId l = g.sum_all(g.sigmoid(g.param(w)));
    g.backward(l);
    return g.scalar(l);
  };
  CHECK(check_gradients(params, bwd, fwd, 1e-3).max_rel_err < 1e-4);
}

TEST_CASE("composite op gradients vs finite differences") {
  // tanh/mul/concat/softmax/matvec/mean_rows/div_scalar chained together
  Rng rng(19);
  Parameter w("w", Tensor::uniform({4, 6}, rng, -1, 1));
  Parameter x("x", Tensor::uniform({6}, rng, -1, 1));
  std::vector<Parameter*> params{&w, &x};
  auto build = [&](Graph& g) {
    NodeId wv = g.param(w);
    NodeId xv = g.param(x);
    NodeId y = g.tanh(g.matvec(wv, xv));
    NodeId s = g.softmax(y);
    NodeId m = g.mul(s, y);
    NodeId denom = g.clamp_min(g.sum_all(g.sigmoid(y)), 1e-6);
    NodeId d = g.div_scalar(g.concat(m, s), denom);
    return g.sum_all(g.mul(d, d));
  };
  auto fwd = [&] {
    Graph g;
    return g.scalar(build(g));
  };
  auto bwd = [&] {
    w.zero_grad();
    x.zero_grad();
    Graph g;
    NodeId l = build(g);
    g.backward(l);
    return g.scalar(l);
  };
  CHECK(check_gradients(params, bwd, fwd, 1e-3).max_rel_err < 1e-4);
}

TEST_CASE("embedding lookup") {
  Graph g;
  NodeId table = g.constant({3, 2}, {10, 11, 20, 21, 30, 31});

  SUBCASE("repeat accumulation") {
    NodeId e = g.embed_rows(table, {0, 0});
    CHECK(g.value(e) == std::vector<double>{10, 11, 10, 11});
    NodeId loss = g.sum_all(e);
    g.backward(loss);
    CHECK(g.grad(table)[0] == doctest::Approx(2.0));
    CHECK(g.grad(table)[1] == doctest::Approx(2.0));
    CHECK(g.grad(table)[2] == doctest::Approx(0.0));
  }

  SUBCASE("empty id sequence") {
    NodeId e = g.embed_rows(table, {});
    CHECK(g.shape(e) == std::vector<int>{0, 2});
    CHECK(g.value(e).empty());
  }

  SUBCASE("direct indexing oracle") {
    NodeId e = g.embed_rows(table, {2, 1});
    CHECK(g.value(e) == std::vector<double>{30, 31, 20, 21});
  }

  SUBCASE("id out of range") {
    CHECK_THROWS_AS(g.embed_rows(table, {3}), VocabError);
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradients leave parameters unchanged") {
    Parameter p("p", Tensor({2}, {1.0f, -2.0f}));
    Adam opt({&p});
    opt.step();
    CHECK(p.value.at(0) == 1.0f);
    CHECK(p.value.at(1) == -2.0f);
  }

  SUBCASE("first update magnitude is about lr") {
    Parameter p("p", Tensor({1}, {0.0f}));
    Adam::Config cfg;
    cfg.lr = 0.01;
    Adam opt({&p}, cfg);
    p.grad[0] = 1.0;
    opt.step();
    CHECK(std::fabs(p.value.at(0) + 0.01) < 1e-6);  // w -= lr * 1
  }

  SUBCASE("w^2 descent is monotone toward zero") {
    Parameter p("w", Tensor({1}, {1.0f}));
    Adam::Config cfg;
    cfg.lr = 0.1;
    Adam opt({&p}, cfg);
    double prev = 1.0;
    for (int i = 0; i < 10; ++i) {
      p.zero_grad();
      p.grad[0] = 2.0 * p.value.at(0);  // d/dw w^2
      opt.step();
      const double w = p.value.at(0);
      CHECK(w < prev);
      CHECK(w > -0.5);
      prev = w;
    }
    CHECK(prev < 0.5);
  }

  SUBCASE("non-finite gradient names the parameter") {
    Parameter p("embedding", Tensor({1}, {0.0f}));
    Adam opt({&p});
    p.grad[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(opt.step(), doctest::Contains("embedding"), NumericError);
  }
}

TEST_CASE("gradient check on a linear model is near exact") {
  Parameter w("w", Tensor({3}, {0.5f, -1.0f, 2.0f}));
  std::vector<Parameter*> params{&w};
  // loss = sum(c * w), gradient is the constant vector
  auto fwd = [&] {
    Graph g;
    NodeId c = g.constant({3}, {1.0, 2.0, 3.0});
    return g.scalar(g.sum_all(g.mul(c, g.param(w))));
  };
  auto bwd = [&] {
    w.zero_grad();
    Graph g;
    NodeId c = g.constant({3}, {1.0, 2.0, 3.0});
    NodeId l = g.sum_all(g.mul(c, g.param(w)));
    g.backward(l);
    return g.scalar(l);
  };
  auto report = check_gradients(params, bwd, fwd, 1e-3);
  CHECK(report.max_rel_err < 1e-7);
}

TEST_CASE("gradient check flags a corrupted gradient") {
  Rng rng(5);
  Parameter w("w", Tensor::uniform({4}, rng, 0.5, 1.5));
  std::vector<Parameter*> params{&w};
  auto fwd = [&] {
    Graph g;
    NodeId y = g.tanh(g.param(w));
    return g.scalar(g.sum_all(g.mul(y, y)));
  };
  auto bwd = [&] {
    w.zero_grad();
    Graph g;
    NodeId y = g.tanh(g.param(w));
    NodeId l = g.sum_all(g.mul(y, y));
    g.backward(l);
    for (auto& gv : w.grad) gv *= 2.0;  // deliberate corruption
    return g.scalar(l);
  };
  CHECK_FALSE(check_gradients(params, bwd, fwd, 1e-3).passed(1e-3));
}

TEST_CASE("backward twice doubles accumulators exactly") {
  Parameter w("w", Tensor({2}, {0.3f, -0.7f}));
  Graph g;
  NodeId wn = g.param(w);
  NodeId l = g.sum_all(g.mul(g.tanh(wn), g.sigmoid(wn)));
  g.backward(l);
  std::vector<double> first = g.grad(wn);
  std::vector<double> first_param = w.grad;
  g.backward(l);
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(g.grad(wn)[i] == 2.0 * first[i]);
    CHECK(w.grad[i] == 2.0 * first_param[i]);
  }
}

TEST_CASE("forward ops stay finite for inputs up to 1e3") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.uniform(-1e3, 1e3);
    Graph g;  // finite checking on: any NaN/Inf would throw
    NodeId a = g.constant({8}, v);
    NodeId s = g.softmax(a);
    NodeId t = g.tanh(a);
    NodeId sg = g.sigmoid(a);
    NodeId c = g.concat(g.mul(s, t), sg);
    NodeId l = g.sum_all(c);
    CHECK(std::isfinite(g.scalar(l)));
  }
}

TEST_CASE("matrix softmax is row-wise") {
  Graph g;
  NodeId m = g.constant({2, 2}, {0, 0, 1000, 0});
  NodeId s = g.softmax(m);
  CHECK(g.value(s)[0] == doctest::Approx(0.5));
  CHECK(g.value(s)[1] == doctest::Approx(0.5));
  CHECK(g.value(s)[2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.value(s)[3] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("gather_sum and slice gradients") {
  Parameter w("w", Tensor({5}, {0.1f, 0.2f, 0.3f, 0.4f, 0.5f}));
  Graph g;
  NodeId wn = g.param(w);
  NodeId sm = g.softmax(wn);
  NodeId picked = g.gather_sum(sm, {1, 3});
  NodeId sl = g.slice(sm, 2, 3);
  NodeId l = g.add(picked, g.sum_all(sl));
  g.backward(l);
  CHECK(g.value(picked)[0] ==
        doctest::Approx(g.value(sm)[1] + g.value(sm)[3]).epsilon(1e-12));
  CHECK(g.value(sl) == std::vector<double>(g.value(sm).begin() + 2, g.value(sm).end()));
  // gradient sanity via finite differences
  std::vector<Parameter*> params{&w};
  auto fwd = [&] {
    Graph g2;
    NodeId s2 = g2.softmax(g2.param(w));
    return g2.scalar(g2.add(g2.gather_sum(s2, {1, 3}), g2.sum_all(g2.slice(s2, 2, 3))));
  };
  auto bwd = [&] {
    w.zero_grad();
    Graph g2;
    NodeId s2 = g2.softmax(g2.param(w));
    NodeId l2 = g2.add(g2.gather_sum(s2, {1, 3}), g2.sum_all(g2.slice(s2, 2, 3)));
    g2.backward(l2);
    return g2.scalar(l2);
  };
  CHECK(check_gradients(params, bwd, fwd, 1e-3).max_rel_err < 1e-4);
}
