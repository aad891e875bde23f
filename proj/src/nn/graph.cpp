#include "beamsem/nn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace beamsem::nn {

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << ')';
  return os.str();
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size()) {
    throw std::invalid_argument("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

Var Graph::input(Tensor t, bool requires_grad) {
  Node n;
  n.value = std::move(t);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Graph::parameter(Parameter& p) {
  Node n;
  n.value_ref = &p.value;
  n.grad_ref = &p.grad;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Graph::emit(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(), [&](Var p) { return nodes_[p.id].requires_grad; });
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor& Graph::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.value_ref ? *n.value_ref : n.value;
}

Tensor& Graph::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.grad_ref) return *n.grad_ref;
  if (n.grad.shape() != value(v).shape()) n.grad = Tensor(value(v).shape());
  return n.grad;
}

const Tensor& Graph::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad_ref) return *n.grad_ref;
  if (n.grad.shape() != value(v).shape()) throw std::logic_error("gradient requested before backward()");
  return n.grad;
}

void Graph::backward(Var loss) {
  if (value(loss).size() != 1) throw std::invalid_argument("backward() needs a scalar loss, got " + shape_string(shape(loss)));
  grad(loss)[0] += 1.0;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.requires_grad && n.backward) n.backward(*this, id);
  }
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Var dense(Graph& g, Var x, Var weight, Var bias) {
  const Tensor& xv = g.value(x);
  const Tensor& w = g.value(weight);
  const Tensor& b = g.value(bias);
  require(w.rank() == 2 && w.dim(1) == xv.size() && b.size() == w.dim(0),
          "dense: weight " + shape_string(w.shape()) + " does not fit input " + shape_string(xv.shape()));
  const std::size_t m = w.dim(0);
  const std::size_t n = w.dim(1);
  Tensor y({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = b[i];
    const double* row = &w[i * n];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xv[j];
    y[i] = acc;
  }
  return g.emit(std::move(y), {x, weight, bias}, [x, weight, bias, m, n](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    if (gr.requires_grad(bias)) {
      Tensor& db = gr.grad(bias);
      for (std::size_t i = 0; i < m; ++i) db[i] += dy[i];
    }
    if (gr.requires_grad(weight)) {
      const Tensor& xv = gr.value(x);
      Tensor& dw = gr.grad(weight);
      for (std::size_t i = 0; i < m; ++i) {
        const double d = dy[i];
        if (d == 0.0) continue;
        double* row = &dw[i * n];
        for (std::size_t j = 0; j < n; ++j) row[j] += d * xv[j];
      }
    }
    if (gr.requires_grad(x)) {
      const Tensor& w = gr.value(weight);
      Tensor& dx = gr.grad(x);
      for (std::size_t i = 0; i < m; ++i) {
        const double d = dy[i];
        if (d == 0.0) continue;
        const double* row = &w[i * n];
        for (std::size_t j = 0; j < n; ++j) dx[j] += d * row[j];
      }
    }
  });
}

namespace {

struct ConvGeometry {
  std::size_t in_c, in_h, in_w, out_c, out_h, out_w, k;
  int stride, pad;

  /// Output columns ox for which ix = ox*stride + kx - pad lies in [0, in_w).
  void col_range(std::size_t kx, std::size_t& lo, std::size_t& hi) const { range(kx, in_w, out_w, lo, hi); }
  void row_range(std::size_t ky, std::size_t& lo, std::size_t& hi) const { range(ky, in_h, out_h, lo, hi); }

 private:
  void range(std::size_t kk, std::size_t in, std::size_t out, std::size_t& lo, std::size_t& hi) const {
    const long off = static_cast<long>(kk) - pad;
    long first = off >= 0 ? 0 : (-off + stride - 1) / stride;
    long last = (static_cast<long>(in) - 1 - off) / stride;  // inclusive
    if (static_cast<long>(in) - 1 - off < 0) last = -1;
    last = std::min(last, static_cast<long>(out) - 1);
    lo = static_cast<std::size_t>(std::max(first, 0L));
    hi = last < first ? lo : static_cast<std::size_t>(last + 1);
  }
};

}  // namespace

Var conv2d(Graph& g, Var x, Var weight, Var bias, int stride) {
  const Tensor& xv = g.value(x);
  const Tensor& w = g.value(weight);
  const Tensor& b = g.value(bias);
  require(stride == 1 || stride == 2, "conv2d: stride must be 1 or 2");
  require(xv.rank() == 3 && w.rank() == 4 && w.dim(1) == xv.dim(0) && w.dim(2) == w.dim(3) && w.dim(2) % 2 == 1 &&
              b.size() == w.dim(0),
          "conv2d: weight " + shape_string(w.shape()) + " does not fit input " + shape_string(xv.shape()));
  ConvGeometry geo{};
  geo.in_c = xv.dim(0);
  geo.in_h = xv.dim(1);
  geo.in_w = xv.dim(2);
  geo.out_c = w.dim(0);
  geo.k = w.dim(2);
  geo.stride = stride;
  geo.pad = static_cast<int>(geo.k / 2);
  geo.out_h = (geo.in_h + 2 * (geo.k / 2) - geo.k) / static_cast<std::size_t>(stride) + 1;
  geo.out_w = (geo.in_w + 2 * (geo.k / 2) - geo.k) / static_cast<std::size_t>(stride) + 1;

  Tensor y({geo.out_c, geo.out_h, geo.out_w});
  const auto s = static_cast<std::size_t>(stride);
  for (std::size_t o = 0; o < geo.out_c; ++o) {
    double* out_plane = &y[o * geo.out_h * geo.out_w];
    std::fill(out_plane, out_plane + geo.out_h * geo.out_w, b[o]);
    for (std::size_t c = 0; c < geo.in_c; ++c) {
      const double* in_plane = &xv[c * geo.in_h * geo.in_w];
      for (std::size_t ky = 0; ky < geo.k; ++ky) {
        std::size_t oy0, oy1;
        geo.row_range(ky, oy0, oy1);
        for (std::size_t kx = 0; kx < geo.k; ++kx) {
          std::size_t ox0, ox1;
          geo.col_range(kx, ox0, ox1);
          const double wv = w[((o * geo.in_c + c) * geo.k + ky) * geo.k + kx];
          for (std::size_t oy = oy0; oy < oy1; ++oy) {
            const std::size_t iy = oy * s + ky - static_cast<std::size_t>(geo.pad);
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - geo.pad;
            const double* in_row = in_plane + static_cast<std::ptrdiff_t>(iy * geo.in_w) + shift;
            double* out_row = out_plane + oy * geo.out_w;
            for (std::size_t ox = ox0; ox < ox1; ++ox) out_row[ox] += wv * in_row[ox * s];
          }
        }
      }
    }
  }

  return g.emit(std::move(y), {x, weight, bias}, [x, weight, bias, geo](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    const auto s = static_cast<std::size_t>(geo.stride);
    const auto pad = static_cast<std::size_t>(geo.pad);  // row offsets are non-negative inside the row range
    const std::size_t out_plane_size = geo.out_h * geo.out_w;
    if (gr.requires_grad(bias)) {
      Tensor& db = gr.grad(bias);
      for (std::size_t o = 0; o < geo.out_c; ++o) {
        double acc = 0.0;
        for (std::size_t i = 0; i < out_plane_size; ++i) acc += dy[o * out_plane_size + i];
        db[o] += acc;
      }
    }
    const bool want_w = gr.requires_grad(weight);
    const bool want_x = gr.requires_grad(x);
    if (!want_w && !want_x) return;
    const Tensor& xv = gr.value(x);
    const Tensor& w = gr.value(weight);
    Tensor* dw = want_w ? &gr.grad(weight) : nullptr;
    Tensor* dx = want_x ? &gr.grad(x) : nullptr;
    for (std::size_t o = 0; o < geo.out_c; ++o) {
      const double* dy_plane = &dy[o * out_plane_size];
      for (std::size_t c = 0; c < geo.in_c; ++c) {
        const std::size_t in_off = c * geo.in_h * geo.in_w;
        for (std::size_t ky = 0; ky < geo.k; ++ky) {
          std::size_t oy0, oy1;
          geo.row_range(ky, oy0, oy1);
          for (std::size_t kx = 0; kx < geo.k; ++kx) {
            std::size_t ox0, ox1;
            geo.col_range(kx, ox0, ox1);
            const std::size_t widx = ((o * geo.in_c + c) * geo.k + ky) * geo.k + kx;
            const double wv = w[widx];
            double acc = 0.0;
            for (std::size_t oy = oy0; oy < oy1; ++oy) {
              const auto base = static_cast<std::ptrdiff_t>(in_off + (oy * s + ky - pad) * geo.in_w) +
                                static_cast<std::ptrdiff_t>(kx) - geo.pad;
              const double* dy_row = dy_plane + oy * geo.out_w;
              if (dw) {
                const double* in_row = xv.data().data() + base;
                for (std::size_t ox = ox0; ox < ox1; ++ox) acc += dy_row[ox] * in_row[ox * s];
              }
              if (dx) {
                double* dx_row = dx->data().data() + base;
                for (std::size_t ox = ox0; ox < ox1; ++ox) dx_row[ox * s] += wv * dy_row[ox];
              }
            }
            if (dw) (*dw)[widx] += acc;
          }
        }
      }
    }
  });
}

Var relu(Graph& g, Var x) {
  Tensor y = g.value(x);
  for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
  return g.emit(std::move(y), {x}, [x](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    const Tensor& xv = gr.value(x);
    Tensor& dx = gr.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (xv[i] > 0.0) dx[i] += dy[i];
  });
}

Var sigmoid(Graph& g, Var x) {
  Tensor y = g.value(x);
  for (auto& v : y.values()) v = 1.0 / (1.0 + std::exp(-v));
  return g.emit(std::move(y), {x}, [x](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    const Tensor& yv = gr.value(Var{self});
    Tensor& dx = gr.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * yv[i] * (1.0 - yv[i]);
  });
}

Var softmax(Graph& g, Var x) {
  Tensor y = g.value(x);
  require(!y.empty(), "softmax: empty input");
  const double mx = *std::max_element(y.values().begin(), y.values().end());
  double total = 0.0;
  for (auto& v : y.values()) {
    v = std::exp(v - mx);
    total += v;
  }
  for (auto& v : y.values()) v /= total;
  return g.emit(std::move(y), {x}, [x](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    const Tensor& yv = gr.value(Var{self});
    double dot = 0.0;
    for (std::size_t i = 0; i < yv.size(); ++i) dot += dy[i] * yv[i];
    Tensor& dx = gr.grad(x);
    for (std::size_t i = 0; i < yv.size(); ++i) dx[i] += yv[i] * (dy[i] - dot);
  });
}

Var multiply(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  const bool broadcast = av.shape() != bv.shape();
  if (broadcast) {
    require(av.rank() == 3 && bv.rank() == 3 && bv.dim(0) == 1 && bv.dim(1) == av.dim(1) && bv.dim(2) == av.dim(2),
            "multiply: shapes " + shape_string(av.shape()) + " and " + shape_string(bv.shape()) + " do not broadcast");
  }
  const std::size_t plane = bv.size();
  Tensor y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i % plane];
  return g.emit(std::move(y), {a, b}, [a, b, plane](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    const Tensor& av = gr.value(a);
    const Tensor& bv = gr.value(b);
    if (gr.requires_grad(a)) {
      Tensor& da = gr.grad(a);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * bv[i % plane];
    }
    if (gr.requires_grad(b)) {
      Tensor& db = gr.grad(b);
      for (std::size_t i = 0; i < dy.size(); ++i) db[i % plane] += dy[i] * av[i];
    }
  });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  require(av.shape() == bv.shape(), "add: shape mismatch " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return g.emit(std::move(y), {a, b}, [a, b](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    for (const Var v : {a, b}) {
      if (!gr.requires_grad(v)) continue;
      Tensor& d = gr.grad(v);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
    }
  });
}

Var concat(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  std::vector<double> values(av.values());
  values.insert(values.end(), bv.values().begin(), bv.values().end());
  const std::size_t split = av.size();
  const std::size_t total = values.size();
  Tensor y({total}, std::move(values));
  return g.emit(std::move(y), {a, b}, [a, b, split](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    if (gr.requires_grad(a)) {
      Tensor& da = gr.grad(a);
      for (std::size_t i = 0; i < split; ++i) da[i] += dy[i];
    }
    if (gr.requires_grad(b)) {
      Tensor& db = gr.grad(b);
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[split + i];
    }
  });
}

Var reshape(Graph& g, Var x, Shape shape) {
  Tensor y = g.value(x).reshaped(std::move(shape));
  return g.emit(std::move(y), {x}, [x](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    Tensor& dx = gr.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
  });
}

Var avg_pool(Graph& g, Var x, int factor) {
  const Tensor& xv = g.value(x);
  const auto f = static_cast<std::size_t>(factor);
  require(factor >= 1 && xv.rank() == 3 && xv.dim(1) % f == 0 && xv.dim(2) % f == 0,
          "avg_pool: factor must divide the spatial size of " + shape_string(xv.shape()));
  const std::size_t ch = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
  const std::size_t oh = h / f, ow = w / f;
  const double scale = 1.0 / static_cast<double>(f * f);
  Tensor y({ch, oh, ow});
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t col = 0; col < w; ++col) y.at(c, r / f, col / f) += scale * xv.at(c, r, col);
  return g.emit(std::move(y), {x}, [x, f, scale](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    Tensor& dx = gr.grad(x);
    for (std::size_t c = 0; c < dx.dim(0); ++c)
      for (std::size_t r = 0; r < dx.dim(1); ++r)
        for (std::size_t col = 0; col < dx.dim(2); ++col) dx.at(c, r, col) += scale * dy.at(c, r / f, col / f);
  });
}

Var upsample(Graph& g, Var x, int factor) {
  const Tensor& xv = g.value(x);
  const auto f = static_cast<std::size_t>(factor);
  require(factor >= 1 && xv.rank() == 3, "upsample: expects a (channels, rows, cols) tensor");
  Tensor y({xv.dim(0), xv.dim(1) * f, xv.dim(2) * f});
  for (std::size_t c = 0; c < y.dim(0); ++c)
    for (std::size_t r = 0; r < y.dim(1); ++r)
      for (std::size_t col = 0; col < y.dim(2); ++col) y.at(c, r, col) = xv.at(c, r / f, col / f);
  return g.emit(std::move(y), {x}, [x, f](Graph& gr, std::size_t self) {
    const Tensor& dy = gr.grad(Var{self});
    Tensor& dx = gr.grad(x);
    for (std::size_t c = 0; c < dy.dim(0); ++c)
      for (std::size_t r = 0; r < dy.dim(1); ++r)
        for (std::size_t col = 0; col < dy.dim(2); ++col) dx.at(c, r / f, col / f) += dy.at(c, r, col);
  });
}

}  // namespace beamsem::nn
