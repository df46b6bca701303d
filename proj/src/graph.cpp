#include "dkpc/graph.hpp"

#include <algorithm>
#include <cmath>

namespace dkpc {

namespace {

std::size_t numel(const std::vector<int>& shape) { return Tensor::numel_of(shape); }

void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace

NodeId Graph::push(Node n, const char* opname) {
  if (check_finite_) {
    for (double v : n.value)
      if (!std::isfinite(v))
        throw NumericError(std::string("non-finite value after ") + opname);
  }
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::int32_t>(nodes_.size() - 1)};
}

NodeId Graph::input(const Tensor& t) {
  Node n;
  n.op = Op::kInput;
  n.shape = t.shape();
  n.value.assign(t.data().begin(), t.data().end());
  return push(std::move(n), "input");
}

NodeId Graph::constant(std::vector<int> shape, std::vector<double> data) {
  require(data.size() == numel(shape), "constant data length does not match shape");
  Node n;
  n.op = Op::kInput;
  n.shape = std::move(shape);
  n.value = std::move(data);
  return push(std::move(n), "constant");
}

NodeId Graph::zeros(std::vector<int> shape) {
  std::vector<double> d(numel(shape), 0.0);
  return constant(std::move(shape), std::move(d));
}

NodeId Graph::param(Parameter& p) {
  Node n;
  n.op = Op::kParam;
  n.shape = p.value.shape();
  n.value.assign(p.value.data().begin(), p.value.data().end());
  n.p = &p;
  return push(std::move(n), "param");
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape.size() == 2 && nb.shape.size() == 2,
          "matmul expects matrices, got " + Tensor::shape_str(na.shape) + " and " +
              Tensor::shape_str(nb.shape));
  require(na.shape[1] == nb.shape[0],
          "matmul inner dimensions disagree: " + Tensor::shape_str(na.shape) + " vs " +
              Tensor::shape_str(nb.shape));
  const int m = na.shape[0], k = na.shape[1], n2 = nb.shape[1];
  Node n;
  n.op = Op::kMatMul;
  n.shape = {m, n2};
  n.value.assign(static_cast<std::size_t>(m) * n2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int kk = 0; kk < k; ++kk) {
      const double av = na.value[static_cast<std::size_t>(i) * k + kk];
      if (av == 0.0) continue;
      for (int j = 0; j < n2; ++j)
        n.value[static_cast<std::size_t>(i) * n2 + j] +=
            av * nb.value[static_cast<std::size_t>(kk) * n2 + j];
    }
  n.parents = {a.v, b.v};
  return push(std::move(n), "matmul");
}

NodeId Graph::matvec(NodeId w, NodeId x) {
  const Node& nw = node(w);
  const Node& nx = node(x);
  require(nw.shape.size() == 2 && nx.shape.size() == 1,
          "matvec expects matrix and vector");
  require(nw.shape[1] == static_cast<int>(nx.value.size()),
          "matvec dimensions disagree: " + Tensor::shape_str(nw.shape) + " vs " +
              Tensor::shape_str(nx.shape));
  const int m = nw.shape[0], k = nw.shape[1];
  Node n;
  n.op = Op::kMatVec;
  n.shape = {m};
  n.value.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j)
      acc += nw.value[static_cast<std::size_t>(i) * k + j] * nx.value[static_cast<std::size_t>(j)];
    n.value[static_cast<std::size_t>(i)] = acc;
  }
  n.parents = {w.v, x.v};
  return push(std::move(n), "matvec");
}

NodeId Graph::transpose(NodeId a) {
  const Node& na = node(a);
  require(na.shape.size() == 2, "transpose expects a matrix");
  const int m = na.shape[0], k = na.shape[1];
  Node n;
  n.op = Op::kTranspose;
  n.shape = {k, m};
  n.value.assign(na.value.size(), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j)
      n.value[static_cast<std::size_t>(j) * m + i] = na.value[static_cast<std::size_t>(i) * k + j];
  n.parents = {a.v};
  return push(std::move(n), "transpose");
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape == nb.shape, "add shape mismatch: " + Tensor::shape_str(na.shape) + " vs " +
                                    Tensor::shape_str(nb.shape));
  Node n;
  n.op = Op::kAdd;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] + nb.value[i];
  n.parents = {a.v, b.v};
  return push(std::move(n), "add");
}

NodeId Graph::sub(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape == nb.shape, "sub shape mismatch");
  Node n;
  n.op = Op::kSub;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] - nb.value[i];
  n.parents = {a.v, b.v};
  return push(std::move(n), "sub");
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape == nb.shape, "mul shape mismatch: " + Tensor::shape_str(na.shape) + " vs " +
                                    Tensor::shape_str(nb.shape));
  Node n;
  n.op = Op::kMul;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = na.value[i] * nb.value[i];
  n.parents = {a.v, b.v};
  return push(std::move(n), "mul");
}

NodeId Graph::one_minus(NodeId a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kOneMinus;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = 1.0 - na.value[i];
  n.parents = {a.v};
  return push(std::move(n), "one_minus");
}

NodeId Graph::scale(NodeId a, double c) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kScale;
  n.shape = na.shape;
  n.c = c;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = c * na.value[i];
  n.parents = {a.v};
  return push(std::move(n), "scale");
}

NodeId Graph::tanh(NodeId a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kTanh;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::tanh(na.value[i]);
  n.parents = {a.v};
  return push(std::move(n), "tanh");
}

NodeId Graph::sigmoid(NodeId a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kSigmoid;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    const double x = na.value[i];
    // split on sign for overflow safety
    n.value[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  n.parents = {a.v};
  return push(std::move(n), "sigmoid");
}

NodeId Graph::log(NodeId a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kLog;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::log(na.value[i]);
  n.parents = {a.v};
  return push(std::move(n), "log");
}

NodeId Graph::clamp_min(NodeId a, double floor) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kClampMin;
  n.shape = na.shape;
  n.c = floor;
  n.value.resize(na.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = std::max(na.value[i], floor);
  n.parents = {a.v};
  return push(std::move(n), "clamp_min");
}

NodeId Graph::softmax(NodeId a) {
  const Node& na = node(a);
  require(!na.value.empty(), "softmax of empty tensor");
  Node n;
  n.op = Op::kSoftmax;
  n.shape = na.shape;
  n.value.resize(na.value.size());
  const int rows = na.shape.size() == 2 ? na.shape[0] : 1;
  const int cols = na.shape.size() == 2 ? na.shape[1] : static_cast<int>(na.value.size());
  require(cols > 0, "softmax along empty axis");
  for (int r = 0; r < rows; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * cols;
    double mx = na.value[off];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, na.value[off + j]);
    double sum = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double e = std::exp(na.value[off + j] - mx);  // max-subtracted for stability
      n.value[off + j] = e;
      sum += e;
    }
    for (int j = 0; j < cols; ++j) n.value[off + j] /= sum;
  }
  n.parents = {a.v};
  return push(std::move(n), "softmax");
}

NodeId Graph::concat(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape.size() == 1 && nb.shape.size() == 1, "concat expects vectors");
  Node n;
  n.op = Op::kConcat;
  n.shape = {static_cast<int>(na.value.size() + nb.value.size())};
  n.value = na.value;
  n.value.insert(n.value.end(), nb.value.begin(), nb.value.end());
  n.parents = {a.v, b.v};
  return push(std::move(n), "concat");
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  require(na.shape.size() == 2 && nb.shape.size() == 2, "concat_cols expects matrices");
  require(na.shape[0] == nb.shape[0], "concat_cols row count mismatch: " +
                                          Tensor::shape_str(na.shape) + " vs " +
                                          Tensor::shape_str(nb.shape));
  const int r = na.shape[0], ca = na.shape[1], cb = nb.shape[1];
  Node n;
  n.op = Op::kConcatCols;
  n.shape = {r, ca + cb};
  n.value.resize(static_cast<std::size_t>(r) * (ca + cb));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < ca; ++j)
      n.value[static_cast<std::size_t>(i) * (ca + cb) + j] =
          na.value[static_cast<std::size_t>(i) * ca + j];
    for (int j = 0; j < cb; ++j)
      n.value[static_cast<std::size_t>(i) * (ca + cb) + ca + j] =
          nb.value[static_cast<std::size_t>(i) * cb + j];
  }
  n.parents = {a.v, b.v};
  return push(std::move(n), "concat_cols");
}

NodeId Graph::stack_rows(const std::vector<NodeId>& rows) {
  require(!rows.empty(), "stack_rows of zero rows");
  const int d = static_cast<int>(node(rows[0]).value.size());
  Node n;
  n.op = Op::kStackRows;
  n.shape = {static_cast<int>(rows.size()), d};
  n.value.reserve(rows.size() * static_cast<std::size_t>(d));
  for (NodeId r : rows) {
    const Node& nr = node(r);
    require(nr.shape.size() == 1 && static_cast<int>(nr.value.size()) == d,
            "stack_rows expects equal-length vectors");
    n.value.insert(n.value.end(), nr.value.begin(), nr.value.end());
    n.parents.push_back(r.v);
  }
  return push(std::move(n), "stack_rows");
}

NodeId Graph::row(NodeId m, int r) {
  const Node& nm = node(m);
  require(nm.shape.size() == 2, "row expects a matrix");
  require(r >= 0 && r < nm.shape[0], "row index out of range");
  const int c = nm.shape[1];
  Node n;
  n.op = Op::kRow;
  n.shape = {c};
  n.a = r;
  n.value.assign(nm.value.begin() + static_cast<std::ptrdiff_t>(r) * c,
                 nm.value.begin() + static_cast<std::ptrdiff_t>(r + 1) * c);
  n.parents = {m.v};
  return push(std::move(n), "row");
}

NodeId Graph::slice(NodeId v, int offset, int len) {
  const Node& nv = node(v);
  require(nv.shape.size() == 1, "slice expects a vector");
  require(offset >= 0 && len >= 0 && offset + len <= static_cast<int>(nv.value.size()),
          "slice out of range");
  Node n;
  n.op = Op::kSlice;
  n.shape = {len};
  n.a = offset;
  n.b = len;
  n.value.assign(nv.value.begin() + offset, nv.value.begin() + offset + len);
  n.parents = {v.v};
  return push(std::move(n), "slice");
}

NodeId Graph::embed_rows(NodeId table, const std::vector<int>& ids) {
  const Node& nt = node(table);
  require(nt.shape.size() == 2, "embed_rows expects a matrix table");
  const int v = nt.shape[0], d = nt.shape[1];
  for (int id : ids)
    if (id < 0 || id >= v)
      throw VocabError("token id " + std::to_string(id) + " out of range for table of " +
                       std::to_string(v) + " rows");
  Node n;
  n.op = Op::kEmbedRows;
  n.shape = {static_cast<int>(ids.size()), d};
  n.idx = ids;
  n.value.reserve(ids.size() * static_cast<std::size_t>(d));
  for (int id : ids)
    n.value.insert(n.value.end(), nt.value.begin() + static_cast<std::ptrdiff_t>(id) * d,
                   nt.value.begin() + static_cast<std::ptrdiff_t>(id + 1) * d);
  n.parents = {table.v};
  return push(std::move(n), "embed_rows");
}

NodeId Graph::mean_rows(NodeId m) {
  const Node& nm = node(m);
  require(nm.shape.size() == 2, "mean_rows expects a matrix");
  require(nm.shape[0] > 0, "mean_rows of empty matrix");
  const int r = nm.shape[0], c = nm.shape[1];
  Node n;
  n.op = Op::kMeanRows;
  n.shape = {c};
  n.value.assign(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      n.value[static_cast<std::size_t>(j)] += nm.value[static_cast<std::size_t>(i) * c + j];
  for (int j = 0; j < c; ++j) n.value[static_cast<std::size_t>(j)] /= r;
  n.parents = {m.v};
  return push(std::move(n), "mean_rows");
}

NodeId Graph::sum_all(NodeId a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::kSumAll;
  n.shape = {1};
  double acc = 0.0;
  for (double v : na.value) acc += v;
  n.value = {acc};
  n.parents = {a.v};
  return push(std::move(n), "sum_all");
}

NodeId Graph::gather_sum(NodeId v, std::vector<int> idx) {
  const Node& nv = node(v);
  require(nv.shape.size() == 1, "gather_sum expects a vector");
  for (int i : idx)
    require(i >= 0 && i < static_cast<int>(nv.value.size()), "gather_sum index out of range");
  Node n;
  n.op = Op::kGatherSum;
  n.shape = {1};
  double acc = 0.0;
  for (int i : idx) acc += nv.value[static_cast<std::size_t>(i)];
  n.value = {acc};
  n.idx = std::move(idx);
  n.parents = {v.v};
  return push(std::move(n), "gather_sum");
}

NodeId Graph::div_scalar(NodeId v, NodeId s) {
  const Node& nv = node(v);
  const Node& ns = node(s);
  require(ns.value.size() == 1, "div_scalar divisor must be scalar");
  Node n;
  n.op = Op::kDivScalar;
  n.shape = nv.shape;
  n.value.resize(nv.value.size());
  const double d = ns.value[0];
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] = nv.value[i] / d;
  n.parents = {v.v, s.v};
  return push(std::move(n), "div_scalar");
}

double Graph::scalar(NodeId id) const {
  const Node& n = node(id);
  if (n.value.size() != 1) throw UsageError("scalar() on non-scalar node");
  return n.value[0];
}

Tensor Graph::value_tensor(NodeId id) const {
  const Node& n = node(id);
  std::vector<float> data(n.value.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(n.value[i]);
  return Tensor(n.shape, std::move(data));
}

void Graph::zero_grad() {
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

void Graph::backward(NodeId loss) {
  if (node(loss).value.size() != 1) throw UsageError("backward requires a scalar loss");
  std::vector<std::vector<double>> sweep(static_cast<std::size_t>(loss.v) + 1);
  sweep[static_cast<std::size_t>(loss.v)] = {1.0};
  for (std::int32_t i = loss.v; i >= 0; --i) {
    if (sweep[static_cast<std::size_t>(i)].empty()) continue;
    backward_node(i, sweep);
    Node& n = nodes_[static_cast<std::size_t>(i)];
    auto& sg = sweep[static_cast<std::size_t>(i)];
    if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
    for (std::size_t j = 0; j < sg.size(); ++j) n.grad[j] += sg[j];
    if (n.op == Op::kParam && n.p != nullptr)
      for (std::size_t j = 0; j < sg.size(); ++j) n.p->grad[j] += sg[j];
    sg.clear();
    sg.shrink_to_fit();
  }
}

void Graph::backward_node(std::int32_t i, std::vector<std::vector<double>>& sweep) {
  Node& n = nodes_[static_cast<std::size_t>(i)];
  const auto& g = sweep[static_cast<std::size_t>(i)];
  auto acc = [&](std::int32_t parent) -> std::vector<double>& {
    auto& buf = sweep[static_cast<std::size_t>(parent)];
    if (buf.empty()) buf.assign(nodes_[static_cast<std::size_t>(parent)].value.size(), 0.0);
    return buf;
  };

  switch (n.op) {
    case Op::kInput:
    case Op::kParam:
      break;
    case Op::kMatMul: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      const Node& nb = nodes_[static_cast<std::size_t>(n.parents[1])];
      const int m = na.shape[0], k = na.shape[1], n2 = nb.shape[1];
      auto& ga = acc(n.parents[0]);
      auto& gb = acc(n.parents[1]);
      // dA = G B^T, dB = A^T G
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < k; ++c) {
          double s = 0.0;
          for (int j = 0; j < n2; ++j)
            s += g[static_cast<std::size_t>(r) * n2 + j] *
                 nb.value[static_cast<std::size_t>(c) * n2 + j];
          ga[static_cast<std::size_t>(r) * k + c] += s;
        }
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < n2; ++c) {
          double s = 0.0;
          for (int j = 0; j < m; ++j)
            s += na.value[static_cast<std::size_t>(j) * k + r] *
                 g[static_cast<std::size_t>(j) * n2 + c];
          gb[static_cast<std::size_t>(r) * n2 + c] += s;
        }
      break;
    }
    case Op::kMatVec: {
      const Node& nw = nodes_[static_cast<std::size_t>(n.parents[0])];
      const Node& nx = nodes_[static_cast<std::size_t>(n.parents[1])];
      const int m = nw.shape[0], k = nw.shape[1];
      auto& gw = acc(n.parents[0]);
      auto& gx = acc(n.parents[1]);
      for (int r = 0; r < m; ++r) {
        const double gr = g[static_cast<std::size_t>(r)];
        if (gr == 0.0) continue;
        for (int c = 0; c < k; ++c) {
          gw[static_cast<std::size_t>(r) * k + c] += gr * nx.value[static_cast<std::size_t>(c)];
          gx[static_cast<std::size_t>(c)] += gr * nw.value[static_cast<std::size_t>(r) * k + c];
        }
      }
      break;
    }
    case Op::kTranspose: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      const int m = na.shape[0], k = na.shape[1];
      auto& ga = acc(n.parents[0]);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < k; ++c)
          ga[static_cast<std::size_t>(r) * k + c] += g[static_cast<std::size_t>(c) * m + r];
      break;
    }
    case Op::kAdd: {
      auto& ga = acc(n.parents[0]);
      auto& gb = acc(n.parents[1]);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ga[j] += g[j];
        gb[j] += g[j];
      }
      break;
    }
    case Op::kSub: {
      auto& ga = acc(n.parents[0]);
      auto& gb = acc(n.parents[1]);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ga[j] += g[j];
        gb[j] -= g[j];
      }
      break;
    }
    case Op::kMul: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      const Node& nb = nodes_[static_cast<std::size_t>(n.parents[1])];
      auto& ga = acc(n.parents[0]);
      auto& gb = acc(n.parents[1]);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ga[j] += g[j] * nb.value[j];
        gb[j] += g[j] * na.value[j];
      }
      break;
    }
    case Op::kOneMinus: {
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < g.size(); ++j) ga[j] -= g[j];
      break;
    }
    case Op::kScale: {
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < g.size(); ++j) ga[j] += n.c * g[j];
      break;
    }
    case Op::kTanh: {
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * (1.0 - n.value[j] * n.value[j]);
      break;
    }
    case Op::kSigmoid: {
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * n.value[j] * (1.0 - n.value[j]);
      break;
    }
    case Op::kLog: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] / na.value[j];
      break;
    }
    case Op::kClampMin: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < g.size(); ++j)
        if (na.value[j] >= n.c) ga[j] += g[j];
      break;
    }
    case Op::kSoftmax: {
      auto& ga = acc(n.parents[0]);
      const int rows = n.shape.size() == 2 ? n.shape[0] : 1;
      const int cols = n.shape.size() == 2 ? n.shape[1] : static_cast<int>(n.value.size());
      for (int r = 0; r < rows; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * cols;
        double dot = 0.0;
        for (int j = 0; j < cols; ++j) dot += g[off + j] * n.value[off + j];
        for (int j = 0; j < cols; ++j) ga[off + j] += n.value[off + j] * (g[off + j] - dot);
      }
      break;
    }
    case Op::kConcat: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      auto& ga = acc(n.parents[0]);
      auto& gb = acc(n.parents[1]);
      const std::size_t la = na.value.size();
      for (std::size_t j = 0; j < la; ++j) ga[j] += g[j];
      for (std::size_t j = la; j < g.size(); ++j) gb[j - la] += g[j];
      break;
    }
    case Op::kConcatCols: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      const Node& nb = nodes_[static_cast<std::size_t>(n.parents[1])];
      const int r = na.shape[0], ca = na.shape[1], cb = nb.shape[1];
      auto& ga = acc(n.parents[0]);
      auto& gb = acc(n.parents[1]);
      for (int i2 = 0; i2 < r; ++i2) {
        for (int j = 0; j < ca; ++j)
          ga[static_cast<std::size_t>(i2) * ca + j] +=
              g[static_cast<std::size_t>(i2) * (ca + cb) + j];
        for (int j = 0; j < cb; ++j)
          gb[static_cast<std::size_t>(i2) * cb + j] +=
              g[static_cast<std::size_t>(i2) * (ca + cb) + ca + j];
      }
      break;
    }
    case Op::kStackRows: {
      const int d = n.shape[1];
      for (std::size_t r = 0; r < n.parents.size(); ++r) {
        auto& gp = acc(n.parents[r]);
        for (int j = 0; j < d; ++j) gp[static_cast<std::size_t>(j)] += g[r * d + j];
      }
      break;
    }
    case Op::kRow: {
      const int c = static_cast<int>(n.value.size());
      auto& ga = acc(n.parents[0]);
      for (int j = 0; j < c; ++j)
        ga[static_cast<std::size_t>(n.a) * c + j] += g[static_cast<std::size_t>(j)];
      break;
    }
    case Op::kSlice: {
      auto& ga = acc(n.parents[0]);
      for (int j = 0; j < n.b; ++j)
        ga[static_cast<std::size_t>(n.a + j)] += g[static_cast<std::size_t>(j)];
      break;
    }
    case Op::kEmbedRows: {
      const int d = n.shape[1];
      auto& ga = acc(n.parents[0]);
      // scatter: repeated ids accumulate
      for (std::size_t r = 0; r < n.idx.size(); ++r)
        for (int j = 0; j < d; ++j)
          ga[static_cast<std::size_t>(n.idx[r]) * d + j] += g[r * d + j];
      break;
    }
    case Op::kMeanRows: {
      const Node& na = nodes_[static_cast<std::size_t>(n.parents[0])];
      const int r = na.shape[0], c = na.shape[1];
      auto& ga = acc(n.parents[0]);
      for (int i2 = 0; i2 < r; ++i2)
        for (int j = 0; j < c; ++j)
          ga[static_cast<std::size_t>(i2) * c + j] += g[static_cast<std::size_t>(j)] / r;
      break;
    }
    case Op::kSumAll: {
      auto& ga = acc(n.parents[0]);
      for (std::size_t j = 0; j < ga.size(); ++j) ga[j] += g[0];
      break;
    }
    case Op::kGatherSum: {
      auto& ga = acc(n.parents[0]);
      for (int ix : n.idx) ga[static_cast<std::size_t>(ix)] += g[0];
      break;
    }
    case Op::kDivScalar: {
      const Node& nv = nodes_[static_cast<std::size_t>(n.parents[0])];
      const Node& ns = nodes_[static_cast<std::size_t>(n.parents[1])];
      const double s = ns.value[0];
      auto& gv = acc(n.parents[0]);
      auto& gs = acc(n.parents[1]);
      double dot = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        gv[j] += g[j] / s;
        dot += g[j] * nv.value[j];
      }
      gs[0] += -dot / (s * s);
      break;
    }
  }
}

}  // namespace dkpc
