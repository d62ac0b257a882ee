#include "bcp/pde.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "bcp/numerics.hpp"

namespace bcp {

namespace {

struct Scan {
  double sigma_max = 0.0;
  double min_drift_at_start = std::numeric_limits<double>::infinity();
};

Scan scan_coefficients(const LevelProblem& level, double horizon, double y0) {
  Scan s;
  const double s_ref = std::abs(level.diffusion(0.0, y0));
  const double depth = y0 - 6.0 * (std::isfinite(s_ref) ? s_ref : 1.0) * std::sqrt(horizon);
  for (int i = 0; i <= 20; ++i) {
    const double t = horizon * i / 20.0;
    for (int j = 0; j <= 40; ++j) {
      const double y = depth * (1.0 - j / 40.0);
      const double sg = level.diffusion(t, y);
      if (std::isfinite(sg)) s.sigma_max = std::max(s.sigma_max, std::abs(sg));
    }
    const double m = level.drift(t, y0);
    if (std::isfinite(m)) s.min_drift_at_start = std::min(s.min_drift_at_start, m);
  }
  return s;
}

// Operator rows for interior nodes: a*v[i-1] + b*v[i] + c*v[i+1].
struct Rows {
  std::vector<double> a, b, c;
  explicit Rows(std::size_t m) : a(m), b(m), c(m) {}
};

class Assembler {
 public:
  Assembler(const LevelProblem& level, const Mesh& mesh)
      : level_(level), mesh_(mesh), mu_(mesh.y.size()), d_(mesh.y.size()) {}

  void operator()(std::size_t k, Rows& r) {
    const auto& y = mesh_.y;
    level_.coefficients(mesh_.t[k], y, mu_, d_);
    const std::size_t n = y.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hm = y[i] - y[i - 1];
      const double hp = y[i + 1] - y[i];
      const double hs = hm + hp;
      const double mu = mu_[i];
      const double dd = d_[i];
      if (!std::isfinite(mu) || !std::isfinite(dd)) {
        std::ostringstream os;
        os << "non-finite coefficient at time index " << k << " (t = " << mesh_.t[k]
           << ", y = " << y[i] << ")";
        throw SolverError(os.str());
      }
      const double aD = 2.0 * dd / (hm * hs);
      const double cD = 2.0 * dd / (hp * hs);
      double aM = -mu * hp / (hm * hs);
      double bM = mu * (hp - hm) / (hm * hp);
      double cM = mu * hm / (hp * hs);
      if (aD + aM < 0.0 || cD + cM < 0.0) {
        // Cell Peclet number too large for central differencing: upwind.
        if (mu > 0.0) {
          aM = 0.0;
          bM = -mu / hp;
          cM = mu / hp;
        } else {
          aM = -mu / hm;
          bM = mu / hm;
          cM = 0.0;
        }
      }
      r.a[i - 1] = aD + aM;
      r.b[i - 1] = -(aD + cD) + bM;
      r.c[i - 1] = cD + cM;
    }
  }

 private:
  const LevelProblem& level_;
  const Mesh& mesh_;
  std::vector<double> mu_, d_;
};

void check_finite(std::span<const double> v, std::size_t k, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << what << ": non-finite value during sweep at time index " << k;
      throw SolverError(os.str());
    }
  }
}

double boundary_derivative(std::span<const double> y, std::span<const double> f, int order) {
  const std::size_t n = y.size();
  const std::size_t np = order == 1 ? 3 : 4;
  std::vector<double> nodes(np);
  for (std::size_t j = 0; j < np; ++j) nodes[j] = y[n - 1 - j];
  const auto w = num::fd_weights(y[n - 1], nodes, order);
  double d = 0.0;
  for (std::size_t j = 0; j < np; ++j) d += w[j] * f[n - 1 - j];
  return d;
}

}  // namespace

Mesh build_mesh(const Problem& p, const Grid& grid) {
  if (grid.nt < 2) throw SolverError("grid: nt must be at least 2");
  if (grid.nx < 3) throw SolverError("grid: nx must be at least 3");
  if (!(grid.theta >= 0.0 && grid.theta <= 1.0)) throw SolverError("grid: theta outside [0, 1]");
  if (grid.rannacher_steps < 0) throw SolverError("grid: negative Rannacher step count");
  const double horizon = p.solve_horizon();
  if (!(horizon > 0.0)) throw SolverError("grid: non-positive solve horizon");

  const LevelProblem level(p);
  const double y0 = level.y0();
  if (!(y0 < 0.0)) throw SolverError("grid: start point must lie below the boundary");

  const Scan scan = scan_coefficients(level, horizon, y0);
  if (!(scan.sigma_max > 0.0)) throw SolverError("grid: could not sample sigma");
  const double required = y0 - 6.0 * scan.sigma_max * std::sqrt(horizon);
  double x_min = grid.x_min;
  if (std::isnan(x_min)) {
    double pad = 0.0;
    if (std::isfinite(scan.min_drift_at_start))
      pad = std::min(3.0 * scan.sigma_max * std::sqrt(horizon),
                     horizon * std::max(0.0, -scan.min_drift_at_start));
    x_min = required - pad;
  } else if (!(x_min < required)) {
    std::ostringstream os;
    os << "grid: truncation level " << x_min << " must lie below y0 - 6 sigma_max sqrt(T) = "
       << required;
    throw SolverError(os.str());
  }

  Mesh mesh;
  const std::size_t nx = static_cast<std::size_t>(grid.nx);
  mesh.y.resize(nx);
  if (grid.stretch == 0.0) {
    // Uniform spacing chosen so that y0 falls exactly on a node.
    const double cells = static_cast<double>(nx - 1) * (-y0) / (-x_min);
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cells)));
    const double dy = -y0 / static_cast<double>(m);
    for (std::size_t i = 0; i < nx; ++i)
      mesh.y[i] = -dy * static_cast<double>(nx - 1 - i);
    mesh.start_node = nx - 1 - m;
    mesh.y[mesh.start_node] = y0;
  } else {
    const double beta = grid.stretch;
    for (std::size_t i = 0; i < nx; ++i) {
      const double xi = static_cast<double>(i) / static_cast<double>(nx - 1);
      mesh.y[i] = x_min * std::sinh(beta * (1.0 - xi)) / std::sinh(beta);
    }
    mesh.y.back() = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 1; i + 1 < nx; ++i)
      if (std::abs(mesh.y[i] - y0) < std::abs(mesh.y[j] - y0)) j = i;
    mesh.y[j] = y0;
    mesh.start_node = j;
    if (!(mesh.y[j - 1] < y0 && y0 < mesh.y[j + 1]))
      throw SolverError("grid: stretched mesh too coarse around the start point");
  }
  mesh.w.assign(nx, 0.0);
  for (std::size_t i = 1; i + 1 < nx; ++i) mesh.w[i] = 0.5 * (mesh.y[i + 1] - mesh.y[i - 1]);

  const int nt = grid.nt;
  const int split = (grid.rannacher_steps + 1) / 2;
  const double dt = horizon / nt;
  mesh.t.push_back(0.0);
  for (int k = 0; k < nt; ++k) {
    const double t0 = dt * k;
    const double t1 = (k + 1 == nt) ? horizon : dt * (k + 1);
    if (k < split || k >= nt - split) {
      mesh.t.push_back(0.5 * (t0 + t1));
      mesh.theta.push_back(1.0);
      mesh.t.push_back(t1);
      mesh.theta.push_back(1.0);
    } else {
      mesh.t.push_back(t1);
      mesh.theta.push_back(grid.theta);
    }
  }
  return mesh;
}

ValueSurface solve_backward(const Problem& p, const Grid& grid) {
  ValueSurface out;
  out.grid = grid;
  out.mesh = build_mesh(p, grid);
  out.x0 = p.x0();
  const Mesh& mesh = out.mesh;
  const LevelProblem level(p);
  const std::size_t L = mesh.t.size();
  const std::size_t n = mesh.y.size();
  const std::size_t m = n - 2;

  out.v.assign(L * n, 0.0);
  out.g.resize(L);
  for (std::size_t k = 0; k < L; ++k) out.g[k] = p.boundary.g(mesh.t[k]);

  double* last = &out.v[(L - 1) * n];
  for (std::size_t i = 0; i + 1 < n; ++i) last[i] = 1.0;
  last[n - 1] = 0.0;

  Assembler assemble(level, mesh);
  Rows now(m), next(m);
  assemble(L - 1, next);
  std::vector<double> sub(m), diag(m), sup(m), rhs(m), scratch(m);

  for (std::size_t k = L - 1; k-- > 0;) {
    const double dt = mesh.t[k + 1] - mesh.t[k];
    const double th = mesh.theta[k];
    assemble(k, now);
    const double* v1 = &out.v[(k + 1) * n];
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = r + 1;
      double val = v1[i];
      if (th < 1.0)
        val += (1.0 - th) * dt * (next.a[r] * v1[i - 1] + next.b[r] * v1[i] + next.c[r] * v1[i + 1]);
      rhs[r] = val;
      sub[r] = -th * dt * now.a[r];
      diag[r] = 1.0 - th * dt * now.b[r];
      sup[r] = -th * dt * now.c[r];
    }
    rhs[0] += th * dt * now.a[0] * 1.0;  // far field v = 1; boundary value 0 adds nothing
    num::solve_tridiagonal(sub, diag, sup, rhs, scratch);
    check_finite(rhs, k, "backward solve");
    double* v0 = &out.v[k * n];
    v0[0] = 1.0;
    std::copy(rhs.begin(), rhs.end(), v0 + 1);
    v0[n - 1] = 0.0;
    std::swap(now, next);
  }

  out.vprime_boundary = boundary_vprime(out);
  out.vsecond_boundary.resize(L);
  for (std::size_t k = 0; k < L; ++k)
    out.vsecond_boundary[k] =
        (k + 1 == L) ? NAN : boundary_derivative(mesh.y, out.row(k), 2);
  return out;
}

std::vector<double> boundary_vprime(const ValueSurface& s) {
  const std::size_t L = s.levels();
  std::vector<double> out(L);
  for (std::size_t k = 0; k < L; ++k)
    out[k] = (k + 1 == L) ? NAN : boundary_derivative(s.mesh.y, s.row(k), 1);
  return out;
}

TabooDensity solve_forward(const Problem& p, const Grid& grid) {
  TabooDensity out;
  out.grid = grid;
  out.mesh = build_mesh(p, grid);
  const Mesh& mesh = out.mesh;
  const LevelProblem level(p);
  const std::size_t L = mesh.t.size();
  const std::size_t n = mesh.y.size();
  const std::size_t m = n - 2;

  out.q.assign(L * n, 0.0);
  out.q[mesh.start_node] = 1.0 / mesh.w[mesh.start_node];

  Assembler assemble(level, mesh);
  Rows now(m), next(m);
  assemble(0, now);
  std::vector<double> sub(m), diag(m), sup(m), rhs(m), scratch(m);

  for (std::size_t k = 0; k + 1 < L; ++k) {
    const double dt = mesh.t[k + 1] - mesh.t[k];
    const double th = mesh.theta[k];
    assemble(k + 1, next);
    const double* q0 = &out.q[k * n];
    // Transpose of (I - th dt A_k), applied to W q.
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = r + 1;
      rhs[r] = mesh.w[i] * q0[i];
      diag[r] = 1.0 - th * dt * now.b[r];
      sub[r] = r > 0 ? -th * dt * now.c[r - 1] : 0.0;
      sup[r] = r + 1 < m ? -th * dt * now.a[r + 1] : 0.0;
    }
    num::solve_tridiagonal(sub, diag, sup, rhs, scratch);
    double* q1 = &out.q[(k + 1) * n];
    for (std::size_t r = 0; r < m; ++r) {
      double val = rhs[r];
      if (th < 1.0) {
        double at = next.b[r] * rhs[r];
        if (r > 0) at += next.c[r - 1] * rhs[r - 1];
        if (r + 1 < m) at += next.a[r + 1] * rhs[r + 1];
        val += (1.0 - th) * dt * at;
      }
      q1[r + 1] = val / mesh.w[r + 1];
    }
    check_finite({q1, n}, k + 1, "forward solve");
    std::swap(now, next);
  }

  out.mass.resize(L);
  out.dq_boundary.resize(L);
  for (std::size_t k = 0; k < L; ++k) {
    const auto row = out.row(k);
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) s += mesh.w[i] * row[i];
    out.mass[k] = s;
    out.dq_boundary[k] = boundary_derivative(mesh.y, row, 1);
  }
  return out;
}

FptDensity fpt_density(const Problem& p, const TabooDensity& taboo) {
  FptDensity out;
  const auto& t = taboo.mesh.t;
  const std::size_t L = t.size();
  const LevelProblem level(p);
  out.t = t;
  out.flux.resize(L);
  out.mass_loss.resize(L);
  for (std::size_t k = 0; k < L; ++k) {
    const double sg = level.diffusion(t[k], 0.0);
    out.flux[k] = -0.5 * sg * sg * taboo.dq_boundary[k];
  }
  for (std::size_t k = 0; k < L; ++k) {
    std::size_t lo = k == 0 ? 0 : (k + 1 == L ? L - 3 : k - 1);
    std::vector<double> nodes{t[lo], t[lo + 1], t[lo + 2]};
    const auto w = num::fd_weights(t[k], nodes, 1);
    out.mass_loss[k] =
        -(w[0] * taboo.mass[lo] + w[1] * taboo.mass[lo + 1] + w[2] * taboo.mass[lo + 2]);
  }
  const double T = t.back();
  out.eps = 0.02 * T;
  double l1 = 0.0;
  for (std::size_t k = 0; k + 1 < L; ++k) {
    const double a = std::max(t[k], out.eps);
    const double b = std::min(t[k + 1], T - out.eps);
    if (b <= a) continue;
    const double d0 = std::abs(out.flux[k] - out.mass_loss[k]);
    const double d1 = std::abs(out.flux[k + 1] - out.mass_loss[k + 1]);
    l1 += 0.5 * (d0 + d1) * (b - a);
  }
  out.l1_discrepancy = l1;
  return out;
}

double noncross_prob(const ValueSurface& s) { return s.row(0)[s.mesh.start_node]; }

Stencil::Stencil(std::span<const double> y) : n_(y.size()), w1_(3 * y.size()), w2_(4 * y.size()), first_(y.size()) {
  if (n_ < 4) throw DomainError("Stencil: needs at least four nodes");
  for (std::size_t i = 0; i < n_; ++i) {
    std::size_t f = i == 0 ? 0 : (i + 1 == n_ ? n_ - 3 : i - 1);
    first_[i] = f;
    const std::vector<double> nodes{y[f], y[f + 1], y[f + 2]};
    const auto w = num::fd_weights(y[i], nodes, 1);
    std::copy(w.begin(), w.end(), w1_.begin() + 3 * i);
    if (i == 0 || i + 1 == n_) {
      const std::size_t g = i == 0 ? 0 : n_ - 4;
      const std::vector<double> n4{y[g], y[g + 1], y[g + 2], y[g + 3]};
      auto w2 = num::fd_weights(y[i], n4, 2);
      std::copy(w2.begin(), w2.end(), w2_.begin() + 4 * i);
    } else {
      auto w2 = num::fd_weights(y[i], nodes, 2);
      std::copy(w2.begin(), w2.end(), w2_.begin() + 4 * i);
      w2_[4 * i + 3] = 0.0;
    }
  }
}

double Stencil::d1(std::span<const double> f, std::size_t i) const {
  const std::size_t s = first_[i];
  const double* w = &w1_[3 * i];
  return w[0] * f[s] + w[1] * f[s + 1] + w[2] * f[s + 2];
}

double Stencil::d2(std::span<const double> f, std::size_t i) const {
  const double* w = &w2_[4 * i];
  if (i == 0) return w[0] * f[0] + w[1] * f[1] + w[2] * f[2] + w[3] * f[3];
  if (i + 1 == n_) {
    const std::size_t g = n_ - 4;
    return w[0] * f[g] + w[1] * f[g + 1] + w[2] * f[g + 2] + w[3] * f[g + 3];
  }
  return w[0] * f[i - 1] + w[1] * f[i] + w[2] * f[i + 1];
}

std::vector<double> space_derivative(std::span<const double> y, std::span<const double> f,
                                     int order) {
  const Stencil st(y);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = order == 1 ? st.d1(f, i) : st.d2(f, i);
  return out;
}

void write_surface_csv(const ValueSurface& s, const std::filesystem::path& file,
                       std::size_t stride) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  os.precision(12);
  os << "t,x,value\n";
  stride = std::max<std::size_t>(1, stride);
  for (std::size_t k = 0; k < s.levels(); k += stride) {
    const auto row = s.row(k);
    for (std::size_t i = 0; i < s.nodes(); i += stride)
      os << s.mesh.t[k] << ',' << s.mesh.y[i] + s.g[k] << ',' << row[i] << '\n';
  }
}

void write_curve_csv(std::span<const double> t, std::span<const double> values,
                     const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  os.precision(12);
  os << "t,x,value\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    os << t[k] << ",,";
    if (std::isfinite(values[k])) os << values[k] + 0.0;
    os << '\n';
  }
}

std::uint64_t cache_key(const std::string& problem_config, const Grid& grid) {
  std::ostringstream os;
  os.precision(17);
  os << problem_config << '|' << grid.nt << ',' << grid.nx << ',' << grid.x_min << ','
     << grid.stretch << ',' << grid.theta << ',' << grid.rannacher_steps;
  const std::string s = os.str();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

constexpr char kMagic[8] = {'B', 'C', 'P', 'S', 'U', 'R', 'F', '1'};

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
void put_vec(std::ofstream& os, const std::vector<double>& v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
template <class T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("surface cache: truncated file");
  return v;
}
std::vector<double> get_vec(std::ifstream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (1ULL << 32)) throw Error("surface cache: corrupt length");
  std::vector<double> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw Error("surface cache: truncated file");
  return v;
}

}  // namespace

void save_surface(const ValueSurface& s, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error("cannot write " + file.string());
  os.write(kMagic, sizeof kMagic);
  put<std::int32_t>(os, s.grid.nt);
  put<std::int32_t>(os, s.grid.nx);
  put<double>(os, s.grid.x_min);
  put<double>(os, s.grid.stretch);
  put<double>(os, s.grid.theta);
  put<std::int32_t>(os, s.grid.rannacher_steps);
  put<double>(os, s.x0);
  put<std::uint64_t>(os, s.mesh.start_node);
  put_vec(os, s.mesh.t);
  put_vec(os, s.mesh.theta);
  put_vec(os, s.mesh.y);
  put_vec(os, s.mesh.w);
  put_vec(os, s.v);
  put_vec(os, s.g);
  put_vec(os, s.vprime_boundary);
  put_vec(os, s.vsecond_boundary);
}

ValueSurface load_surface(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error("cannot read " + file.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error("surface cache: bad magic in " + file.string());
  ValueSurface s;
  s.grid.nt = get<std::int32_t>(is);
  s.grid.nx = get<std::int32_t>(is);
  s.grid.x_min = get<double>(is);
  s.grid.stretch = get<double>(is);
  s.grid.theta = get<double>(is);
  s.grid.rannacher_steps = get<std::int32_t>(is);
  s.x0 = get<double>(is);
  s.mesh.start_node = get<std::uint64_t>(is);
  s.mesh.t = get_vec(is);
  s.mesh.theta = get_vec(is);
  s.mesh.y = get_vec(is);
  s.mesh.w = get_vec(is);
  s.v = get_vec(is);
  s.g = get_vec(is);
  s.vprime_boundary = get_vec(is);
  s.vsecond_boundary = get_vec(is);
  if (s.v.size() != s.mesh.t.size() * s.mesh.y.size())
    throw Error("surface cache: inconsistent dimensions");
  return s;
}

}  // namespace bcp
