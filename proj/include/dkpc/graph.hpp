#ifndef DKPC_GRAPH_HPP
#define DKPC_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "dkpc/tensor.hpp"

namespace dkpc {

struct NodeId {
  std::int32_t v = -1;
  bool valid() const { return v >= 0; }
};

// Eager reverse-mode tape. Node values are computed on construction and held
// in double precision (the 64-bit accumulation path); parameters and exported
// tensors stay f32. Parents always precede children on the tape, so one
// reverse sweep visits each node exactly once.
//
// backward() propagates through a scratch buffer per sweep and then adds the
// sweep result into the persistent accumulators, so running it twice without
// zeroing doubles every accumulator exactly.
class Graph {
 public:
  explicit Graph(bool check_finite = true) : check_finite_(check_finite) {}

  // --- leaves ---
  NodeId input(const Tensor& t);
  NodeId constant(std::vector<int> shape, std::vector<double> data);
  NodeId scalar_input(double v) { return constant({1}, {v}); }
  NodeId zeros(std::vector<int> shape);
  NodeId param(Parameter& p);

  // --- linear algebra ---
  NodeId matmul(NodeId a, NodeId b);     // (m x k)(k x n) -> m x n
  NodeId matvec(NodeId w, NodeId x);     // (m x n)(n)     -> m
  NodeId transpose(NodeId a);            // m x n -> n x m

  // --- elementwise ---
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId one_minus(NodeId a);
  NodeId scale(NodeId a, double c);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId log(NodeId a);
  NodeId clamp_min(NodeId a, double floor);

  // --- shape / gather ---
  NodeId softmax(NodeId a);                        // rank 1, or rank 2 row-wise
  NodeId concat(NodeId a, NodeId b);               // vectors
  NodeId concat_cols(NodeId a, NodeId b);          // matrices, same row count
  NodeId stack_rows(const std::vector<NodeId>& rows);
  NodeId row(NodeId m, int r);
  NodeId slice(NodeId v, int offset, int len);     // vector slice
  NodeId embed_rows(NodeId table, const std::vector<int>& ids);
  NodeId mean_rows(NodeId m);
  NodeId sum_all(NodeId a);
  NodeId gather_sum(NodeId v, std::vector<int> idx);
  NodeId div_scalar(NodeId v, NodeId s);

  // --- access ---
  const std::vector<double>& value(NodeId id) const { return node(id).value; }
  const std::vector<int>& shape(NodeId id) const { return node(id).shape; }
  double scalar(NodeId id) const;
  Tensor value_tensor(NodeId id) const;
  const std::vector<double>& grad(NodeId id) const { return node(id).grad; }

  // Reverse sweep from a scalar loss. Adds into node accumulators and into
  // Parameter::grad for parameter leaves.
  void backward(NodeId loss);

  void zero_grad();
  std::size_t size() const { return nodes_.size(); }
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  enum class Op : std::uint8_t {
    kInput, kParam, kMatMul, kMatVec, kTranspose, kAdd, kSub, kMul, kOneMinus,
    kScale, kTanh, kSigmoid, kLog, kClampMin, kSoftmax, kConcat, kConcatCols,
    kStackRows, kRow, kSlice, kEmbedRows, kMeanRows, kSumAll, kGatherSum,
    kDivScalar,
  };

  struct Node {
    Op op;
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;      // persistent accumulator, lazily sized
    std::vector<std::int32_t> parents;
    std::vector<int> idx;          // embed ids / gather indices
    int a = 0, b = 0;              // row index, slice offset/len
    double c = 0.0;                // scale factor / clamp floor
    Parameter* p = nullptr;
  };

  Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id.v)]; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id.v)]; }
  NodeId push(Node n, const char* opname);
  void backward_node(std::int32_t i, std::vector<std::vector<double>>& sweep);

  std::vector<Node> nodes_;
  bool check_finite_;
};

}  // namespace dkpc

#endif  // DKPC_GRAPH_HPP
