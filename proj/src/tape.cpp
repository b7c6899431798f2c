#include "tpg/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tpg {

std::vector<double> forward_softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax over empty logits");
  double mx = logits[0];
  for (double z : logits) {
    if (!std::isfinite(z)) throw std::invalid_argument("non-finite logit rejected");
    mx = std::max(mx, z);
  }
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out[i] = std::exp(logits[i] - mx);
  // Normalizer summed in value order: permuting the logits permutes the
  // output bit-exactly.
  std::vector<double> sorted(out);
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double e : sorted) sum += e;
  for (auto& p : out) p /= sum;
  return out;
}

NodeId Tape::push(Node n, int len) {
  n.val = static_cast<int>(arena_.size());
  n.len = len;
  arena_.resize(arena_.size() + static_cast<size_t>(len), 0.0);
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_node(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    throw std::out_of_range("tape node id out of range");
  }
}

void Tape::check_same_len(NodeId a, NodeId b) const {
  check_node(a);
  check_node(b);
  if (nodes_[a].len != nodes_[b].len) {
    throw std::invalid_argument("tape op requires equal-length operands");
  }
}

NodeId Tape::input(std::span<const double> v) {
  Node n{};
  n.op = Op::kInput;
  NodeId id = push(n, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), mut(nodes_[id]));
  return id;
}

NodeId Tape::scalar_input(double v) { return input(std::span<const double>(&v, 1)); }

NodeId Tape::param_row(const ParamStore& store, BlockId mat, int row) {
  const ParamBlock& blk = store.block(mat);
  if (row < 0 || row >= blk.rows) throw std::out_of_range("param_row: row out of range");
  Node n{};
  n.op = Op::kParamRow;
  n.w = mat;
  n.aux = row;
  NodeId id = push(n, blk.cols);
  const double* src = blk.value.data() + static_cast<size_t>(row) * blk.cols;
  std::copy(src, src + blk.cols, mut(nodes_[id]));
  return id;
}

NodeId Tape::affine(const ParamStore& store, BlockId w, BlockId bias, NodeId x) {
  check_node(x);
  const ParamBlock& wb = store.block(w);
  const ParamBlock& bb = store.block(bias);
  if (nodes_[x].len != wb.cols) throw std::invalid_argument("affine: input length != matrix cols");
  if (bb.rows != 1 || bb.cols != wb.rows) throw std::invalid_argument("affine: bias shape mismatch");
  Node n{};
  n.op = Op::kAffine;
  n.a = x;
  n.w = w;
  n.bias = bias;
  NodeId id = push(n, wb.rows);
  const double* xv = val(nodes_[x]);
  double* out = mut(nodes_[id]);
  const int rows = wb.rows, cols = wb.cols;
  for (int r = 0; r < rows; ++r) {
    const double* wrow = wb.value.data() + static_cast<size_t>(r) * cols;
    double acc = bb.value[static_cast<size_t>(r)];
    for (int c = 0; c < cols; ++c) acc += wrow[c] * xv[c];
    out[r] = acc;
  }
  return id;
}

NodeId Tape::tanh_of(NodeId x) {
  check_node(x);
  Node n{};
  n.op = Op::kTanh;
  n.a = x;
  NodeId id = push(n, nodes_[x].len);
  const double* xv = val(nodes_[x]);
  double* out = mut(nodes_[id]);
  for (int i = 0; i < nodes_[id].len; ++i) out[i] = std::tanh(xv[i]);
  return id;
}

NodeId Tape::sigmoid_of(NodeId x) {
  check_node(x);
  Node n{};
  n.op = Op::kSigmoid;
  n.a = x;
  NodeId id = push(n, nodes_[x].len);
  const double* xv = val(nodes_[x]);
  double* out = mut(nodes_[id]);
  for (int i = 0; i < nodes_[id].len; ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  return id;
}

NodeId Tape::softmax_of(NodeId logits) {
  check_node(logits);
  const Node& src = nodes_[logits];
  std::vector<double> p = forward_softmax(std::span<const double>(val(src), static_cast<size_t>(src.len)));
  Node n{};
  n.op = Op::kSoftmax;
  n.a = logits;
  NodeId id = push(n, src.len);
  std::copy(p.begin(), p.end(), mut(nodes_[id]));
  return id;
}

NodeId Tape::concat(NodeId a, NodeId b) {
  check_node(a);
  check_node(b);
  Node n{};
  n.op = Op::kConcat;
  n.a = a;
  n.b = b;
  NodeId id = push(n, nodes_[a].len + nodes_[b].len);
  double* out = mut(nodes_[id]);
  std::copy(val(nodes_[a]), val(nodes_[a]) + nodes_[a].len, out);
  std::copy(val(nodes_[b]), val(nodes_[b]) + nodes_[b].len, out + nodes_[a].len);
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_same_len(a, b);
  Node n{};
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  NodeId id = push(n, nodes_[a].len);
  const double* av = val(nodes_[a]);
  const double* bv = val(nodes_[b]);
  double* out = mut(nodes_[id]);
  for (int i = 0; i < nodes_[id].len; ++i) out[i] = av[i] + bv[i];
  return id;
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  check_same_len(a, b);
  Node n{};
  n.op = Op::kHadamard;
  n.a = a;
  n.b = b;
  NodeId id = push(n, nodes_[a].len);
  const double* av = val(nodes_[a]);
  const double* bv = val(nodes_[b]);
  double* out = mut(nodes_[id]);
  for (int i = 0; i < nodes_[id].len; ++i) out[i] = av[i] * bv[i];
  return id;
}

NodeId Tape::gate_blend(NodeId z, NodeId a, NodeId b) {
  check_same_len(z, a);
  check_same_len(a, b);
  Node n{};
  n.op = Op::kGateBlend;
  n.a = z;
  n.b = a;
  n.c = b;
  NodeId id = push(n, nodes_[a].len);
  const double* zv = val(nodes_[z]);
  const double* av = val(nodes_[a]);
  const double* bv = val(nodes_[b]);
  double* out = mut(nodes_[id]);
  for (int i = 0; i < nodes_[id].len; ++i) out[i] = zv[i] * av[i] + (1.0 - zv[i]) * bv[i];
  return id;
}

NodeId Tape::dot(NodeId a, NodeId b) {
  check_same_len(a, b);
  Node n{};
  n.op = Op::kDot;
  n.a = a;
  n.b = b;
  NodeId id = push(n, 1);
  const double* av = val(nodes_[a]);
  const double* bv = val(nodes_[b]);
  double acc = 0.0;
  for (int i = 0; i < nodes_[a].len; ++i) acc += av[i] * bv[i];
  *mut(nodes_[id]) = acc;
  return id;
}

NodeId Tape::weighted_sum(NodeId weights, std::span<const NodeId> items, int item_len) {
  check_node(weights);
  if (nodes_[weights].len != static_cast<int>(items.size())) {
    throw std::invalid_argument("weighted_sum: one weight per item required");
  }
  for (NodeId it : items) {
    check_node(it);
    if (nodes_[it].len != item_len) throw std::invalid_argument("weighted_sum: item length mismatch");
  }
  Node n{};
  n.op = Op::kWeightedSum;
  n.a = weights;
  n.list = static_cast<int>(lists_.size());
  n.nlist = static_cast<int>(items.size());
  lists_.insert(lists_.end(), items.begin(), items.end());
  NodeId id = push(n, item_len);
  const double* wv = val(nodes_[weights]);
  double* out = mut(nodes_[id]);
  for (size_t k = 0; k < items.size(); ++k) {
    const double* iv = val(nodes_[items[k]]);
    for (int i = 0; i < item_len; ++i) out[i] += wv[k] * iv[i];
  }
  return id;
}

NodeId Tape::stack_scalars(std::span<const NodeId> scalars) {
  for (NodeId s : scalars) {
    check_node(s);
    if (nodes_[s].len != 1) throw std::invalid_argument("stack_scalars: operands must be scalars");
  }
  Node n{};
  n.op = Op::kStack;
  n.list = static_cast<int>(lists_.size());
  n.nlist = static_cast<int>(scalars.size());
  lists_.insert(lists_.end(), scalars.begin(), scalars.end());
  NodeId id = push(n, static_cast<int>(scalars.size()));
  double* out = mut(nodes_[id]);
  for (size_t k = 0; k < scalars.size(); ++k) out[k] = *val(nodes_[scalars[k]]);
  return id;
}

NodeId Tape::sum_scalars(std::span<const NodeId> scalars) {
  for (NodeId s : scalars) {
    check_node(s);
    if (nodes_[s].len != 1) throw std::invalid_argument("sum_scalars: operands must be scalars");
  }
  Node n{};
  n.op = Op::kSumScalars;
  n.list = static_cast<int>(lists_.size());
  n.nlist = static_cast<int>(scalars.size());
  lists_.insert(lists_.end(), scalars.begin(), scalars.end());
  NodeId id = push(n, 1);
  double acc = 0.0;
  for (NodeId s : scalars) acc += *val(nodes_[s]);
  *mut(nodes_[id]) = acc;
  return id;
}

NodeId Tape::log_select(NodeId pmf, int index) {
  check_node(pmf);
  if (index < 0 || index >= nodes_[pmf].len) {
    throw std::out_of_range("log_select: action index outside pmf");
  }
  Node n{};
  n.op = Op::kLogSelect;
  n.a = pmf;
  n.aux = index;
  NodeId id = push(n, 1);
  *mut(nodes_[id]) = std::log(std::max(val(nodes_[pmf])[index], kProbFloor));
  return id;
}

std::span<const double> Tape::value(NodeId id) const {
  check_node(id);
  return {val(nodes_[id]), static_cast<size_t>(nodes_[id].len)};
}

double Tape::scalar(NodeId id) const {
  check_node(id);
  if (nodes_[id].len != 1) throw std::invalid_argument("scalar() on non-scalar node");
  return *val(nodes_[id]);
}

int Tape::length(NodeId id) const {
  check_node(id);
  return nodes_[id].len;
}

void Tape::backward(ParamStore& store, NodeId node, double scale) {
  check_node(node);
  if (nodes_[node].len != 1) throw std::invalid_argument("backward seeds a scalar node");
  grads_.assign(arena_.size(), 0.0);
  touched_.assign(nodes_.size(), 0);
  grads_[static_cast<size_t>(nodes_[node].val)] = scale;
  touched_[static_cast<size_t>(node)] = 1;

  auto touch = [&](NodeId id) { touched_[static_cast<size_t>(id)] = 1; };

  for (NodeId id = node; id >= 0; --id) {
    if (!touched_[static_cast<size_t>(id)]) continue;
    const Node& n = nodes_[static_cast<size_t>(id)];
    const double* g = grads_.data() + n.val;
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kParamRow: {
        ParamBlock& blk = store.block(n.w);
        double* dst = blk.grad.data() + static_cast<size_t>(n.aux) * blk.cols;
        for (int i = 0; i < n.len; ++i) dst[i] += g[i];
        break;
      }
      case Op::kAffine: {
        ParamBlock& wb = store.block(n.w);
        ParamBlock& bb = store.block(n.bias);
        const Node& x = nodes_[static_cast<size_t>(n.a)];
        const double* xv = val(x);
        double* gx = grd(x);
        const int rows = wb.rows, cols = wb.cols;
        for (int r = 0; r < rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          const double* wrow = wb.value.data() + static_cast<size_t>(r) * cols;
          double* gwrow = wb.grad.data() + static_cast<size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) {
            gx[c] += wrow[c] * gr;
            gwrow[c] += gr * xv[c];
          }
          bb.grad[static_cast<size_t>(r)] += gr;
        }
        touch(n.a);
        break;
      }
      case Op::kTanh: {
        const Node& x = nodes_[static_cast<size_t>(n.a)];
        const double* y = val(n);
        double* gx = grd(x);
        for (int i = 0; i < n.len; ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
        touch(n.a);
        break;
      }
      case Op::kSigmoid: {
        const Node& x = nodes_[static_cast<size_t>(n.a)];
        const double* y = val(n);
        double* gx = grd(x);
        for (int i = 0; i < n.len; ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
        touch(n.a);
        break;
      }
      case Op::kSoftmax: {
        const Node& x = nodes_[static_cast<size_t>(n.a)];
        const double* y = val(n);
        double* gx = grd(x);
        double gy_dot_y = 0.0;
        for (int i = 0; i < n.len; ++i) gy_dot_y += g[i] * y[i];
        for (int i = 0; i < n.len; ++i) gx[i] += y[i] * (g[i] - gy_dot_y);
        touch(n.a);
        break;
      }
      case Op::kConcat: {
        const Node& a = nodes_[static_cast<size_t>(n.a)];
        const Node& b = nodes_[static_cast<size_t>(n.b)];
        double* ga = grd(a);
        double* gb = grd(b);
        for (int i = 0; i < a.len; ++i) ga[i] += g[i];
        for (int i = 0; i < b.len; ++i) gb[i] += g[a.len + i];
        touch(n.a);
        touch(n.b);
        break;
      }
      case Op::kAdd: {
        double* ga = grd(nodes_[static_cast<size_t>(n.a)]);
        double* gb = grd(nodes_[static_cast<size_t>(n.b)]);
        for (int i = 0; i < n.len; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        touch(n.a);
        touch(n.b);
        break;
      }
      case Op::kHadamard: {
        const Node& a = nodes_[static_cast<size_t>(n.a)];
        const Node& b = nodes_[static_cast<size_t>(n.b)];
        const double* av = val(a);
        const double* bv = val(b);
        double* ga = grd(a);
        double* gb = grd(b);
        for (int i = 0; i < n.len; ++i) {
          ga[i] += g[i] * bv[i];
          gb[i] += g[i] * av[i];
        }
        touch(n.a);
        touch(n.b);
        break;
      }
      case Op::kGateBlend: {
        const Node& z = nodes_[static_cast<size_t>(n.a)];
        const Node& a = nodes_[static_cast<size_t>(n.b)];
        const Node& b = nodes_[static_cast<size_t>(n.c)];
        const double* zv = val(z);
        const double* av = val(a);
        const double* bv = val(b);
        double* gz = grd(z);
        double* ga = grd(a);
        double* gb = grd(b);
        for (int i = 0; i < n.len; ++i) {
          gz[i] += g[i] * (av[i] - bv[i]);
          ga[i] += g[i] * zv[i];
          gb[i] += g[i] * (1.0 - zv[i]);
        }
        touch(n.a);
        touch(n.b);
        touch(n.c);
        break;
      }
      case Op::kDot: {
        const Node& a = nodes_[static_cast<size_t>(n.a)];
        const Node& b = nodes_[static_cast<size_t>(n.b)];
        const double* av = val(a);
        const double* bv = val(b);
        double* ga = grd(a);
        double* gb = grd(b);
        const double g0 = g[0];
        for (int i = 0; i < a.len; ++i) {
          ga[i] += g0 * bv[i];
          gb[i] += g0 * av[i];
        }
        touch(n.a);
        touch(n.b);
        break;
      }
      case Op::kWeightedSum: {
        const Node& w = nodes_[static_cast<size_t>(n.a)];
        const double* wv = val(w);
        double* gw = grd(w);
        for (int k = 0; k < n.nlist; ++k) {
          const NodeId item = lists_[static_cast<size_t>(n.list + k)];
          const Node& it = nodes_[static_cast<size_t>(item)];
          const double* iv = val(it);
          double* gi = grd(it);
          double acc = 0.0;
          for (int i = 0; i < n.len; ++i) {
            acc += g[i] * iv[i];
            gi[i] += g[i] * wv[k];
          }
          gw[k] += acc;
          touch(item);
        }
        touch(n.a);
        break;
      }
      case Op::kStack: {
        for (int k = 0; k < n.nlist; ++k) {
          const NodeId s = lists_[static_cast<size_t>(n.list + k)];
          *grd(nodes_[static_cast<size_t>(s)]) += g[k];
          touch(s);
        }
        break;
      }
      case Op::kSumScalars: {
        for (int k = 0; k < n.nlist; ++k) {
          const NodeId s = lists_[static_cast<size_t>(n.list + k)];
          *grd(nodes_[static_cast<size_t>(s)]) += g[0];
          touch(s);
        }
        break;
      }
      case Op::kLogSelect: {
        const Node& p = nodes_[static_cast<size_t>(n.a)];
        const double pi = val(p)[n.aux];
        grd(p)[n.aux] += g[0] / std::max(pi, kProbFloor);
        touch(n.a);
        break;
      }
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  arena_.clear();
  grads_.clear();
  lists_.clear();
  touched_.clear();
}

void accumulate_log_prob_grad(ParamStore& store, Tape& tape, NodeId pmf, int action, double scale) {
  NodeId lp = tape.log_select(pmf, action);
  if (scale == 0.0) return;
  tape.backward(store, lp, scale);
}

}  // namespace tpg
