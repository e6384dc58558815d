#include "moldiff/num/tensor.hpp"

#include <cmath>
#include <cstddef>

namespace moldiff::num {

std::string Shape::str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::constant: return "constant";
        case OpKind::leaf: return "leaf";
        case OpKind::matmul: return "matmul";
        case OpKind::add: return "add";
        case OpKind::sub: return "sub";
        case OpKind::mul: return "mul";
        case OpKind::divide: return "divide";
        case OpKind::scale: return "scale";
        case OpKind::shift: return "shift";
        case OpKind::neg: return "neg";
        case OpKind::relu: return "relu";
        case OpKind::tanh_fn: return "tanh";
        case OpKind::softplus: return "softplus";
        case OpKind::exp_fn: return "exp";
        case OpKind::log_fn: return "log";
        case OpKind::sqrt_fn: return "sqrt";
        case OpKind::sum: return "sum";
        case OpKind::mean: return "mean";
        case OpKind::rowsum: return "rowsum";
        case OpKind::lse_rows: return "lse_rows";
        case OpKind::broadcast_rows: return "broadcast_rows";
        case OpKind::broadcast_cols: return "broadcast_cols";
        case OpKind::concat_rows: return "concat_rows";
        case OpKind::concat_cols: return "concat_cols";
        case OpKind::gather_rows: return "gather_rows";
        case OpKind::transpose: return "transpose";
        case OpKind::reshape: return "reshape";
    }
    return "?";
}

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::usage: return "usage";
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
        case ErrorCategory::data: return "data";
        case ErrorCategory::shape: return "shape";
        case ErrorCategory::numeric: return "numeric";
        case ErrorCategory::state: return "state";
    }
    return "?";
}

const Array& Tensor::value() const { return tape_->value_of(id_); }
Shape Tensor::shape() const { return tape_->shape_of(id_); }
bool Tensor::requires_grad() const { return tape_->requires_grad_of(id_); }

double Tensor::scalar() const {
    if (shape().numel() != 1)
        fail(ErrorCategory::shape, "scalar() on tensor of shape " + shape().str());
    return value()[0];
}

Tensor Tape::constant(Array value, Shape shape) {
    if (value.size() != shape.numel())
        fail(ErrorCategory::shape,
             "constant: data length " + std::to_string(value.size()) + " vs shape " + shape.str());
    return emit(OpKind::constant, shape, std::move(value), {}, nullptr);
}

Tensor Tape::constant(const Eigen::MatrixXd& m) {
    Array v(m.size());
    as_mat(v, {m.rows(), m.cols()}) = m;
    return constant(std::move(v), {m.rows(), m.cols()});
}

Tensor Tape::constant(double v) {
    Array a(1);
    a[0] = v;
    return constant(std::move(a), {1, 1});
}

Tensor Tape::row_constant(const Eigen::VectorXd& v) {
    Array a(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) a[i] = v[i];
    return constant(std::move(a), {1, v.size()});
}

Tensor Tape::use(Param& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return Tensor(this, it->second);
    Node node;
    node.kind = OpKind::leaf;
    node.shape = p.shape;
    node.value = p.value;
    node.requires_grad = true;
    node.param = &p;
    nodes_.push_back(std::move(node));
    int id = static_cast<int>(nodes_.size()) - 1;
    param_nodes_.emplace(&p, id);
    return Tensor(this, id);
}

Tensor Tape::emit(OpKind kind, Shape shape, Array value, std::vector<int> inputs, BackwardFn back) {
    if (!value.allFinite())
        fail(ErrorCategory::numeric, std::string(op_name(kind)) + ": non-finite output");
    Node node;
    node.kind = kind;
    node.shape = shape;
    node.value = std::move(value);
    for (int in : inputs)
        if (nodes_[static_cast<std::size_t>(in)].requires_grad) node.requires_grad = true;
    node.inputs = std::move(inputs);
    if (node.requires_grad) node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Array& Tape::grad_of(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) n.grad = Array::Zero(n.shape.numel());
    return n.grad;
}

void Tape::backward(const Tensor& loss) {
    if (loss.shape().numel() != 1)
        fail(ErrorCategory::shape, "backward: loss must be scalar, got " + loss.shape().str());
    if (&loss.tape() != this) fail(ErrorCategory::state, "backward: loss from another tape");
    grad_of(loss.id())[0] += 1.0;
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        if (n.back) n.back(*this, id);
        if (n.param) n.param->grad += n.grad;
    }
}

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!(a.shape() == b.shape()))
        fail(ErrorCategory::shape,
             std::string(op) + ": shapes " + a.shape().str() + " vs " + b.shape().str());
}

void check_same_tape(const Tensor& a, const Tensor& b) {
    if (&a.tape() != &b.tape()) fail(ErrorCategory::state, "operands from different tapes");
}

Tensor unary(OpKind kind, const Tensor& a, Array value,
             const std::function<void(Tape&, int, int)>& back) {
    int aid = a.id();
    return a.tape().emit(kind, a.shape(), std::move(value), {aid},
                         [aid, back](Tape& t, int self) { back(t, self, aid); });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_same_tape(a, b);
    Shape sa = a.shape(), sb = b.shape();
    if (sa.cols != sb.rows)
        fail(ErrorCategory::shape, "matmul: shapes " + sa.str() + " vs " + sb.str());
    Shape out{sa.rows, sb.cols};
    Array v(out.numel());
    as_mat(v, out).noalias() = a.mat() * b.mat();
    int aid = a.id(), bid = b.id();
    return a.tape().emit(OpKind::matmul, out, std::move(v), {aid, bid}, [=](Tape& t, int self) {
        MatView g = as_mat(t.grad_of(self), out);
        if (t.requires_grad_of(aid))
            as_mat(t.grad_of(aid), sa) += g * as_mat(t.value_of(bid), sb).transpose();
        if (t.requires_grad_of(bid))
            as_mat(t.grad_of(bid), sb) += as_mat(t.value_of(aid), sa).transpose() * g;
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_tape(a, b);
    check_same_shape("add", a, b);
    int aid = a.id(), bid = b.id();
    return a.tape().emit(OpKind::add, a.shape(), a.value() + b.value(), {aid, bid},
                         [=](Tape& t, int self) {
                             if (t.requires_grad_of(aid)) t.grad_of(aid) += t.grad_of(self);
                             if (t.requires_grad_of(bid)) t.grad_of(bid) += t.grad_of(self);
                         });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_tape(a, b);
    check_same_shape("sub", a, b);
    int aid = a.id(), bid = b.id();
    return a.tape().emit(OpKind::sub, a.shape(), a.value() - b.value(), {aid, bid},
                         [=](Tape& t, int self) {
                             if (t.requires_grad_of(aid)) t.grad_of(aid) += t.grad_of(self);
                             if (t.requires_grad_of(bid)) t.grad_of(bid) -= t.grad_of(self);
                         });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_tape(a, b);
    check_same_shape("mul", a, b);
    int aid = a.id(), bid = b.id();
    return a.tape().emit(OpKind::mul, a.shape(), a.value() * b.value(), {aid, bid},
                         [=](Tape& t, int self) {
                             const Array& g = t.grad_of(self);
                             if (t.requires_grad_of(aid)) t.grad_of(aid) += g * t.value_of(bid);
                             if (t.requires_grad_of(bid)) t.grad_of(bid) += g * t.value_of(aid);
                         });
}

Tensor divide(const Tensor& a, const Tensor& b) {
    check_same_tape(a, b);
    check_same_shape("divide", a, b);
    int aid = a.id(), bid = b.id();
    return a.tape().emit(OpKind::divide, a.shape(), a.value() / b.value(), {aid, bid},
                         [=](Tape& t, int self) {
                             const Array& g = t.grad_of(self);
                             const Array& bv = t.value_of(bid);
                             if (t.requires_grad_of(aid)) t.grad_of(aid) += g / bv;
                             if (t.requires_grad_of(bid))
                                 t.grad_of(bid) -= g * t.value_of(aid) / (bv * bv);
                         });
}

Tensor scale(const Tensor& a, double s) {
    return unary(OpKind::scale, a, a.value() * s, [s](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self) * s;
    });
}

Tensor shift(const Tensor& a, double s) {
    return unary(OpKind::shift, a, a.value() + s, [](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self);
    });
}

Tensor neg(const Tensor& a) {
    return unary(OpKind::neg, a, -a.value(), [](Tape& t, int self, int aid) {
        t.grad_of(aid) -= t.grad_of(self);
    });
}

Tensor relu(const Tensor& a) {
    return unary(OpKind::relu, a, a.value().max(0.0), [](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self) * (t.value_of(aid) > 0.0).cast<double>();
    });
}

Tensor tanh(const Tensor& a) {
    Array v = a.value().tanh();
    return unary(OpKind::tanh_fn, a, std::move(v), [](Tape& t, int self, int aid) {
        const Array& y = t.value_of(self);
        t.grad_of(aid) += t.grad_of(self) * (1.0 - y * y);
    });
}

Tensor softplus(const Tensor& a) {
    // stable: max(x,0) + log1p(exp(-|x|))
    const Array& x = a.value();
    Array v = x.max(0.0) + (-x.abs()).exp().log1p();
    return unary(OpKind::softplus, a, std::move(v), [](Tape& t, int self, int aid) {
        const Array& x = t.value_of(aid);
        Array sig = 1.0 / (1.0 + (-x).exp());
        t.grad_of(aid) += t.grad_of(self) * sig;
    });
}

Tensor exp(const Tensor& a) {
    return unary(OpKind::exp_fn, a, a.value().exp(), [](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self) * t.value_of(self);
    });
}

Tensor log(const Tensor& a) {
    return unary(OpKind::log_fn, a, a.value().log(), [](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self) / t.value_of(aid);
    });
}

Tensor sqrt(const Tensor& a) {
    return unary(OpKind::sqrt_fn, a, a.value().sqrt(), [](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self) / (2.0 * t.value_of(self));
    });
}

Tensor sum(const Tensor& a) {
    Array v(1);
    v[0] = a.value().sum();
    return unary(OpKind::sum, a, std::move(v), [](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self)[0];
    });
}

Tensor mean(const Tensor& a) {
    Array v(1);
    double n = static_cast<double>(a.shape().numel());
    v[0] = a.value().sum() / n;
    return unary(OpKind::mean, a, std::move(v), [n](Tape& t, int self, int aid) {
        t.grad_of(aid) += t.grad_of(self)[0] / n;
    });
}

Tensor rowsum(const Tensor& a) {
    Shape s = a.shape();
    Array v(s.rows);
    as_mat(v, {s.rows, 1}) = a.mat().rowwise().sum();
    int aid = a.id();
    return a.tape().emit(OpKind::rowsum, {s.rows, 1}, std::move(v), {aid},
                         [aid, s](Tape& t, int self) {
                             MatView g = as_mat(t.grad_of(self), {s.rows, 1});
                             as_mat(t.grad_of(aid), s).colwise() += g.col(0);
                         });
}

Tensor lse_rows(const Tensor& a) {
    Shape s = a.shape();
    Array v(s.rows);
    Array soft(s.numel());  // saved softmax for backward
    MatView x = a.mat();
    MutMatView sm = as_mat(soft, s);
    for (Eigen::Index i = 0; i < s.rows; ++i) {
        double m = x.row(i).maxCoeff();
        Eigen::ArrayXd e = (x.row(i).array() - m).exp();
        double z = e.sum();
        v[i] = m + std::log(z);
        sm.row(i) = (e / z).matrix();
    }
    int aid = a.id();
    return a.tape().emit(OpKind::lse_rows, {s.rows, 1}, std::move(v), {aid},
                         [aid, s, soft = std::move(soft)](Tape& t, int self) {
                             MatView g = as_mat(t.grad_of(self), {s.rows, 1});
                             MutMatView ga = as_mat(t.grad_of(aid), s);
                             MatView sm = as_mat(soft, s);
                             for (Eigen::Index i = 0; i < s.rows; ++i)
                                 ga.row(i) += g(i, 0) * sm.row(i);
                         });
}

Tensor broadcast_rows(const Tensor& a, Eigen::Index n) {
    Shape s = a.shape();
    if (s.rows != 1)
        fail(ErrorCategory::shape, "broadcast_rows: input must be 1xM, got " + s.str());
    Shape out{n, s.cols};
    Array v(out.numel());
    as_mat(v, out).rowwise() = a.mat().row(0);
    int aid = a.id();
    return a.tape().emit(OpKind::broadcast_rows, out, std::move(v), {aid},
                         [aid, out, s](Tape& t, int self) {
                             MatView g = as_mat(t.grad_of(self), out);
                             as_mat(t.grad_of(aid), s).row(0) += g.colwise().sum();
                         });
}

Tensor broadcast_cols(const Tensor& a, Eigen::Index n) {
    Shape s = a.shape();
    if (s.cols != 1)
        fail(ErrorCategory::shape, "broadcast_cols: input must be Mx1, got " + s.str());
    Shape out{s.rows, n};
    Array v(out.numel());
    as_mat(v, out).colwise() = a.mat().col(0);
    int aid = a.id();
    return a.tape().emit(OpKind::broadcast_cols, out, std::move(v), {aid},
                         [aid, out, s](Tape& t, int self) {
                             MatView g = as_mat(t.grad_of(self), out);
                             as_mat(t.grad_of(aid), s).col(0) += g.rowwise().sum();
                         });
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) fail(ErrorCategory::shape, "concat_rows: no parts");
    Eigen::Index cols = parts[0].shape().cols, rows = 0;
    std::vector<int> ids;
    std::vector<Shape> shapes;
    for (const Tensor& p : parts) {
        check_same_tape(parts[0], p);
        if (p.shape().cols != cols)
            fail(ErrorCategory::shape, "concat_rows: column mismatch " + p.shape().str() +
                                           " vs " + parts[0].shape().str());
        rows += p.shape().rows;
        ids.push_back(p.id());
        shapes.push_back(p.shape());
    }
    Shape out{rows, cols};
    Array v(out.numel());
    MutMatView m = as_mat(v, out);
    Eigen::Index r = 0;
    for (const Tensor& p : parts) {
        m.middleRows(r, p.shape().rows) = p.mat();
        r += p.shape().rows;
    }
    return parts[0].tape().emit(
        OpKind::concat_rows, out, std::move(v), ids,
        [ids, shapes, out](Tape& t, int self) {
            MatView g = as_mat(t.grad_of(self), out);
            Eigen::Index r = 0;
            for (std::size_t k = 0; k < ids.size(); ++k) {
                if (t.requires_grad_of(ids[k]))
                    as_mat(t.grad_of(ids[k]), shapes[k]) += g.middleRows(r, shapes[k].rows);
                r += shapes[k].rows;
            }
        });
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) fail(ErrorCategory::shape, "concat_cols: no parts");
    Eigen::Index rows = parts[0].shape().rows, cols = 0;
    std::vector<int> ids;
    std::vector<Shape> shapes;
    for (const Tensor& p : parts) {
        check_same_tape(parts[0], p);
        if (p.shape().rows != rows)
            fail(ErrorCategory::shape, "concat_cols: row mismatch " + p.shape().str() + " vs " +
                                           parts[0].shape().str());
        cols += p.shape().cols;
        ids.push_back(p.id());
        shapes.push_back(p.shape());
    }
    Shape out{rows, cols};
    Array v(out.numel());
    MutMatView m = as_mat(v, out);
    Eigen::Index c = 0;
    for (const Tensor& p : parts) {
        m.middleCols(c, p.shape().cols) = p.mat();
        c += p.shape().cols;
    }
    return parts[0].tape().emit(
        OpKind::concat_cols, out, std::move(v), ids,
        [ids, shapes, out](Tape& t, int self) {
            MatView g = as_mat(t.grad_of(self), out);
            Eigen::Index c = 0;
            for (std::size_t k = 0; k < ids.size(); ++k) {
                if (t.requires_grad_of(ids[k]))
                    as_mat(t.grad_of(ids[k]), shapes[k]) += g.middleCols(c, shapes[k].cols);
                c += shapes[k].cols;
            }
        });
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
    Shape s = table.shape();
    for (int i : ids)
        if (i < 0 || i >= s.rows)
            fail(ErrorCategory::shape,
                 "gather_rows: index " + std::to_string(i) + " out of " + s.str());
    Shape out{static_cast<Eigen::Index>(ids.size()), s.cols};
    Array v(out.numel());
    MutMatView m = as_mat(v, out);
    for (std::size_t k = 0; k < ids.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = table.mat().row(ids[k]);
    int tid = table.id();
    return table.tape().emit(OpKind::gather_rows, out, std::move(v), {tid},
                             [tid, ids, s, out](Tape& t, int self) {
                                 MatView g = as_mat(t.grad_of(self), out);
                                 MutMatView gt = as_mat(t.grad_of(tid), s);
                                 for (std::size_t k = 0; k < ids.size(); ++k)
                                     gt.row(ids[k]) += g.row(static_cast<Eigen::Index>(k));
                             });
}

Tensor transpose(const Tensor& a) {
    Shape s = a.shape();
    Shape out{s.cols, s.rows};
    Array v(out.numel());
    as_mat(v, out) = a.mat().transpose();
    int aid = a.id();
    return a.tape().emit(OpKind::transpose, out, std::move(v), {aid},
                         [aid, s, out](Tape& t, int self) {
                             as_mat(t.grad_of(aid), s) +=
                                 as_mat(t.grad_of(self), out).transpose();
                         });
}

Tensor reshape(const Tensor& a, Shape s) {
    if (s.numel() != a.shape().numel())
        fail(ErrorCategory::shape, "reshape: " + a.shape().str() + " to " + s.str());
    int aid = a.id();
    return a.tape().emit(OpKind::reshape, s, a.value(), {aid}, [aid](Tape& t, int self) {
        t.grad_of(aid) += t.grad_of(self);
    });
}

// ---- composites ------------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    Tensor y = matmul(x, w);
    return add(y, broadcast_rows(b, y.shape().rows));
}

Tensor softmax_rows(const Tensor& x) {
    return exp(log_softmax_rows(x));
}

Tensor log_softmax_rows(const Tensor& x) {
    return sub(x, broadcast_cols(lse_rows(x), x.shape().cols));
}

Tensor normalize_rows(const Tensor& x) {
    Tensor norms = sqrt(rowsum(mul(x, x)));
    return divide(x, broadcast_cols(norms, x.shape().cols));
}

Tensor square(const Tensor& a) { return mul(a, a); }

Tensor mse(const Tensor& a, const Tensor& b) { return mean(square(sub(a, b))); }

Tensor apply_primitive(OpKind kind, std::span<const Tensor> in, const PrimitiveAttr& attr) {
    auto want = [&](std::size_t n) {
        if (in.size() != n)
            fail(ErrorCategory::shape, std::string(op_name(kind)) + ": expects " +
                                           std::to_string(n) + " inputs, got " +
                                           std::to_string(in.size()));
    };
    switch (kind) {
        case OpKind::matmul: want(2); return matmul(in[0], in[1]);
        case OpKind::add: want(2); return add(in[0], in[1]);
        case OpKind::sub: want(2); return sub(in[0], in[1]);
        case OpKind::mul: want(2); return mul(in[0], in[1]);
        case OpKind::divide: want(2); return divide(in[0], in[1]);
        case OpKind::scale: want(1); return scale(in[0], attr.scalar);
        case OpKind::shift: want(1); return shift(in[0], attr.scalar);
        case OpKind::neg: want(1); return neg(in[0]);
        case OpKind::relu: want(1); return relu(in[0]);
        case OpKind::tanh_fn: want(1); return tanh(in[0]);
        case OpKind::softplus: want(1); return softplus(in[0]);
        case OpKind::exp_fn: want(1); return exp(in[0]);
        case OpKind::log_fn: want(1); return log(in[0]);
        case OpKind::sqrt_fn: want(1); return sqrt(in[0]);
        case OpKind::sum: want(1); return sum(in[0]);
        case OpKind::mean: want(1); return mean(in[0]);
        case OpKind::rowsum: want(1); return rowsum(in[0]);
        case OpKind::lse_rows: want(1); return lse_rows(in[0]);
        case OpKind::broadcast_rows: want(1); return broadcast_rows(in[0], attr.n);
        case OpKind::broadcast_cols: want(1); return broadcast_cols(in[0], attr.n);
        case OpKind::concat_rows: return concat_rows(in);
        case OpKind::concat_cols: return concat_cols(in);
        case OpKind::gather_rows: want(1); return gather_rows(in[0], attr.ids);
        case OpKind::transpose: want(1); return transpose(in[0]);
        case OpKind::reshape: want(1); return reshape(in[0], attr.target);
        case OpKind::constant:
        case OpKind::leaf:
            break;
    }
    fail(ErrorCategory::shape, std::string(op_name(kind)) + ": not a primitive application");
}

}  // namespace moldiff::num
