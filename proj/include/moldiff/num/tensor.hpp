#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moldiff/error.hpp"

namespace moldiff::num {

// Flat row-major storage for all tensor data.
using Array = Eigen::ArrayXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatView = Eigen::Map<const RowMajorMatrix>;
using MutMatView = Eigen::Map<RowMajorMatrix>;

// Every tensor in the pipeline is rank <= 2; scalars are 1x1 and vectors
// are 1xN rows. Higher-rank data (the edge tensor) is carried as a
// (rows*rows) x classes matrix by the modules that need it.
struct Shape {
    Eigen::Index rows = 1;
    Eigen::Index cols = 1;

    Eigen::Index numel() const { return rows * cols; }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

inline MatView as_mat(const Array& a, Shape s) { return MatView(a.data(), s.rows, s.cols); }
inline MutMatView as_mat(Array& a, Shape s) { return MutMatView(a.data(), s.rows, s.cols); }

// A persistent trainable array. Lives across tapes; gradients accumulate
// into `grad` when a tape that used the parameter is differentiated.
struct Param {
    std::string name;
    Shape shape;
    Array value;
    Array grad;

    Param() = default;
    Param(std::string n, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(n)),
          shape{rows, cols},
          value(Array::Zero(rows * cols)),
          grad(Array::Zero(rows * cols)) {}

    void zero_grad() { grad.setZero(); }
    MatView mat() const { return as_mat(value, shape); }
};

using ParamRefs = std::vector<Param*>;

enum class OpKind {
    constant,
    leaf,
    matmul,
    add,
    sub,
    mul,
    divide,
    scale,
    shift,
    neg,
    relu,
    tanh_fn,
    softplus,
    exp_fn,
    log_fn,
    sqrt_fn,
    sum,
    mean,
    rowsum,
    lse_rows,
    broadcast_rows,
    broadcast_cols,
    concat_rows,
    concat_cols,
    gather_rows,
    transpose,
    reshape,
};

const char* op_name(OpKind k);

class Tape;

// Lightweight handle to a node on a tape.
class Tensor {
  public:
    Tensor() = default;

    bool defined() const { return tape_ != nullptr; }
    const Array& value() const;
    Shape shape() const;
    bool requires_grad() const;
    double scalar() const;  // 1x1 tensors only
    MatView mat() const { return as_mat(value(), shape()); }
    int id() const { return id_; }
    Tape& tape() const { return *tape_; }

  private:
    friend class Tape;
    Tensor(Tape* t, int id) : tape_(t), id_(id) {}
    Tape* tape_ = nullptr;
    int id_ = -1;
};

using BackwardFn = std::function<void(Tape&, int self)>;

// Records primitive applications in creation order (which is topological:
// inputs always precede outputs). backward() replays the list in strict
// reverse order. Single-threaded by contract.
class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor constant(Array value, Shape shape);
    Tensor constant(const Eigen::MatrixXd& m);
    Tensor constant(double v);
    Tensor row_constant(const Eigen::VectorXd& v);  // 1xN

    // Leaf with requires_grad; repeated use() of one Param returns the
    // same node.
    Tensor use(Param& p);

    // loss must be scalar. Accumulates into Param::grad for every
    // parameter leaf reachable from loss; unreachable leaves are left
    // untouched (their gradient contribution is zero).
    void backward(const Tensor& loss);

    std::size_t node_count() const { return nodes_.size(); }

    // Used by the op implementations; forward values are checked finite
    // here, so no operation can silently propagate NaN/Inf.
    Tensor emit(OpKind kind, Shape shape, Array value, std::vector<int> inputs, BackwardFn back);

    const Array& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    Shape shape_of(int id) const { return nodes_[static_cast<std::size_t>(id)].shape; }
    bool requires_grad_of(int id) const {
        return nodes_[static_cast<std::size_t>(id)].requires_grad;
    }
    // Gradient buffer of a node, allocated zero on first touch during
    // backward. Only meaningful inside backward fns and directly after
    // backward().
    Array& grad_of(int id);
    bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() > 0; }

  private:
    struct Node {
        OpKind kind;
        Shape shape;
        Array value;
        Array grad;  // empty until touched by backward
        bool requires_grad = false;
        Param* param = nullptr;
        std::vector<int> inputs;
        BackwardFn back;
    };

    std::vector<Node> nodes_;
    std::map<const Param*, int> param_nodes_;
};

// ---- primitives ------------------------------------------------------
// Shape rules are listed per primitive; violations throw Error(shape)
// naming both shapes.

Tensor matmul(const Tensor& a, const Tensor& b);        // (m,k)x(k,n)->(m,n)
Tensor add(const Tensor& a, const Tensor& b);           // same shape
Tensor sub(const Tensor& a, const Tensor& b);           // same shape
Tensor mul(const Tensor& a, const Tensor& b);           // same shape, elementwise
Tensor divide(const Tensor& a, const Tensor& b);        // same shape, elementwise
Tensor scale(const Tensor& a, double s);                // any shape
Tensor shift(const Tensor& a, double s);                // any shape
Tensor neg(const Tensor& a);                            // any shape
Tensor relu(const Tensor& a);                           // any shape
Tensor tanh(const Tensor& a);                           // any shape
Tensor softplus(const Tensor& a);                       // any shape
Tensor exp(const Tensor& a);                            // any shape
Tensor log(const Tensor& a);                            // any shape
Tensor sqrt(const Tensor& a);                           // any shape
Tensor sum(const Tensor& a);                            // (m,n)->(1,1)
Tensor mean(const Tensor& a);                           // (m,n)->(1,1)
Tensor rowsum(const Tensor& a);                         // (m,n)->(m,1)
Tensor lse_rows(const Tensor& a);                       // (m,n)->(m,1), stable
Tensor broadcast_rows(const Tensor& a, Eigen::Index n); // (1,m)->(n,m)
Tensor broadcast_cols(const Tensor& a, Eigen::Index n); // (m,1)->(m,n)
Tensor concat_rows(std::span<const Tensor> parts);      // same cols
Tensor concat_cols(std::span<const Tensor> parts);      // same rows
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape s);               // same numel, row-major

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

// ---- composites ------------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);  // x*w + b rows
Tensor softmax_rows(const Tensor& x);
Tensor log_softmax_rows(const Tensor& x);
Tensor normalize_rows(const Tensor& x);  // each row scaled to unit L2 norm
Tensor mse(const Tensor& a, const Tensor& b);
Tensor square(const Tensor& a);

// Uniform dispatcher over the primitive set; `attr` carries the scalar /
// size / index arguments of the few primitives that take one.
struct PrimitiveAttr {
    double scalar = 0.0;
    Eigen::Index n = 0;
    Shape target{};
    std::vector<int> ids{};
};

Tensor apply_primitive(OpKind kind, std::span<const Tensor> inputs, const PrimitiveAttr& attr = {});

}  // namespace moldiff::num
