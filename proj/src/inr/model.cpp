#include "xct/inr/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "xct/core/rng.hpp"
#include "xct/kernels/kernels.hpp"

namespace xct {

namespace {

#if defined(__GLIBC__)
extern "C" void sincosf(float, float*, float*);
extern "C" void sincos(double, double*, double*);
inline void sin_cos(float t, float* s, float* c) { sincosf(t, s, c); }
inline void sin_cos(double t, double* s, double* c) { sincos(t, s, c); }
#else
inline void sin_cos(float t, float* s, float* c) { *s = std::sin(t); *c = std::cos(t); }
inline void sin_cos(double t, double* s, double* c) { *s = std::sin(t); *c = std::cos(t); }
#endif

template <typename T>
void ensure(std::vector<T>& v, std::size_t n) {
  if (v.size() != n) v.assign(n, T(0));
}

}  // namespace

template <typename T>
Mlp<T>::Mlp(const MlpConfig& c, bool initialize) : cfg(c) {
  if (cfg.in_dim < 1 || cfg.hidden < 1 || cfg.n_layers < 1)
    throw std::invalid_argument("mlp: dims and layer count must be >= 1");
  if (!(cfg.omega0 > 0.0)) throw std::invalid_argument("mlp: omega0 must be > 0");
  compute_offsets();
  params.assign(total_, T(0));
  if (!initialize) return;

  Rng rng(derive_seed(cfg.seed, 0x31A9));
  for (int l = 0; l < cfg.n_layers; ++l) {
    const int nin = layer_in(l);
    const double bound = (l == 0) ? 1.0 / nin : std::sqrt(6.0 / nin) / cfg.omega0;
    T* w = params.data() + w_off(l);
    const std::size_t cnt = static_cast<std::size_t>(cfg.hidden) * nin;
    for (std::size_t i = 0; i < cnt; ++i) w[i] = static_cast<T>(rng.uniform(-bound, bound));
  }
  {
    const double bound = std::sqrt(6.0 / cfg.hidden) / cfg.omega0;
    T* w = params.data() + wout_off_;
    for (int i = 0; i < cfg.hidden; ++i) w[i] = static_cast<T>(rng.uniform(-bound, bound));
  }
  for (int l = 0; l < cfg.n_layers; ++l) {
    T* m = params.data() + mod_off(l);
    m[0] = T(1);  // a
    m[1] = T(1);  // b
    m[2] = T(0);  // c
    m[3] = T(0);  // d
  }
}

template <typename T>
void Mlp<T>::compute_offsets() {
  w_off_.resize(static_cast<std::size_t>(cfg.n_layers));
  bias_off_.resize(static_cast<std::size_t>(cfg.n_layers));
  std::size_t at = 0;
  for (int l = 0; l < cfg.n_layers; ++l) {
    w_off_[static_cast<std::size_t>(l)] = at;
    at += static_cast<std::size_t>(cfg.hidden) * layer_in(l);
    bias_off_[static_cast<std::size_t>(l)] = at;
    at += static_cast<std::size_t>(cfg.hidden);
  }
  wout_off_ = at;
  at += static_cast<std::size_t>(cfg.hidden);
  bout_off_ = at;
  at += 1;
  mods_off_ = at;
  at += 4 * static_cast<std::size_t>(cfg.n_layers);
  total_ = at;
}

template <typename T>
void Mlp<T>::forward(const T* features, int n, T* out, MlpCache<T>* cache) const {
  if (params.size() != total_) throw std::invalid_argument("mlp: parameter vector size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!std::isfinite(static_cast<double>(params[i])))
      throw std::invalid_argument("mlp: non-finite parameters");

  const int hd = cfg.hidden, L = cfg.n_layers;
  const std::size_t nh = static_cast<std::size_t>(n) * hd;

  MlpCache<T> local;
  MlpCache<T>& cc = cache ? *cache : local;
  cc.n = n;
  cc.h.resize(static_cast<std::size_t>(L) + 1);
  cc.pre.resize(static_cast<std::size_t>(L));
  cc.sv.resize(static_cast<std::size_t>(L));
  cc.cv.resize(static_cast<std::size_t>(L));
  ensure(cc.h[0], static_cast<std::size_t>(n) * cfg.in_dim);
  std::memcpy(cc.h[0].data(), features, sizeof(T) * cc.h[0].size());

  for (int l = 0; l < L; ++l) {
    const int nin = layer_in(l);
    auto& pre = cc.pre[static_cast<std::size_t>(l)];
    auto& sv = cc.sv[static_cast<std::size_t>(l)];
    auto& cv = cc.cv[static_cast<std::size_t>(l)];
    auto& hout = cc.h[static_cast<std::size_t>(l) + 1];
    ensure(pre, nh);
    ensure(sv, nh);
    ensure(cv, nh);
    ensure(hout, nh);

    kernels::gemm_nt(static_cast<std::size_t>(n), static_cast<std::size_t>(hd),
                     static_cast<std::size_t>(nin), cc.h[static_cast<std::size_t>(l)].data(),
                     params.data() + w_off(l), pre.data());
    const T* bias = params.data() + bias_off(l);
    const T* mod = params.data() + mod_off(l);
    const T a = mod[0], bmod = mod[1], cmod = mod[2], d = mod[3];
    const T bw = static_cast<T>(bmod * static_cast<T>(cfg.omega0));
    for (int i = 0; i < n; ++i) {
      T* pr = pre.data() + static_cast<std::size_t>(i) * hd;
      T* sp = sv.data() + static_cast<std::size_t>(i) * hd;
      T* cp = cv.data() + static_cast<std::size_t>(i) * hd;
      T* ho = hout.data() + static_cast<std::size_t>(i) * hd;
      for (int j = 0; j < hd; ++j) {
        pr[j] += bias[j];
        sin_cos(bw * pr[j] + cmod, &sp[j], &cp[j]);
        ho[j] = a * sp[j] + d;
      }
    }
  }

  const T* wout = params.data() + wout_off_;
  const T bout = params[bout_off_];
  const auto& hl = cc.h[static_cast<std::size_t>(L)];
  for (int i = 0; i < n; ++i)
    out[i] = kernels::dot(hl.data() + static_cast<std::size_t>(i) * hd, wout,
                          static_cast<std::size_t>(hd)) +
             bout;
}

template <typename T>
void Mlp<T>::backward(const MlpCache<T>& cache, const T* d_out, std::vector<T>& grads) const {
  if (cache.n <= 0 || cache.h.size() != static_cast<std::size_t>(cfg.n_layers) + 1)
    throw std::invalid_argument("mlp: backward requires a populated forward cache");
  const int n = cache.n, hd = cfg.hidden, L = cfg.n_layers;
  const std::size_t nh = static_cast<std::size_t>(n) * hd;
  grads.assign(total_, T(0));

  // Head: y_i = W_out·h_i + b_out.
  kernels::gemm_tn(1, static_cast<std::size_t>(hd), static_cast<std::size_t>(n), d_out,
                   cache.h[static_cast<std::size_t>(L)].data(), grads.data() + wout_off_);
  {
    T s = T(0);
    for (int i = 0; i < n; ++i) s += d_out[i];
    grads[bout_off_] = s;
  }

  std::vector<T> dh(nh), dprev;
  kernels::gemm_nn(static_cast<std::size_t>(n), static_cast<std::size_t>(hd), 1, d_out,
                   params.data() + wout_off_, dh.data());

  for (int l = L - 1; l >= 0; --l) {
    const int nin = layer_in(l);
    const auto& pre = cache.pre[static_cast<std::size_t>(l)];
    const auto& sv = cache.sv[static_cast<std::size_t>(l)];
    const auto& cv = cache.cv[static_cast<std::size_t>(l)];
    const T* mod = params.data() + mod_off(l);
    const T a = mod[0], bmod = mod[1];
    const T w0 = static_cast<T>(cfg.omega0);
    T* gm = grads.data() + mod_off(l);

    // dh ⇒ modulation grads, then dh becomes dPre in place.
    T da = T(0), db = T(0), dc = T(0), dd = T(0);
    for (std::size_t i = 0; i < nh; ++i) {
      const T g = dh[i];
      da += g * sv[i];
      dd += g;
      const T dt = g * a * cv[i];
      db += dt * w0 * pre[i];
      dc += dt;
      dh[i] = dt * bmod * w0;
    }
    gm[0] = da;
    gm[1] = db;
    gm[2] = dc;
    gm[3] = dd;

    kernels::gemm_tn(static_cast<std::size_t>(hd), static_cast<std::size_t>(nin),
                     static_cast<std::size_t>(n), dh.data(),
                     cache.h[static_cast<std::size_t>(l)].data(), grads.data() + w_off(l));
    T* gb = grads.data() + bias_off(l);
    for (int i = 0; i < n; ++i) {
      const T* row = dh.data() + static_cast<std::size_t>(i) * hd;
      for (int j = 0; j < hd; ++j) gb[j] += row[j];
    }
    if (l > 0) {
      ensure(dprev, static_cast<std::size_t>(n) * nin);
      kernels::gemm_nn(static_cast<std::size_t>(n), static_cast<std::size_t>(nin),
                       static_cast<std::size_t>(hd), dh.data(), params.data() + w_off(l),
                       dprev.data());
      dh.swap(dprev);
    }
  }
}

template struct Mlp<float>;
template struct Mlp<double>;

namespace {

constexpr char kMagic[4] = {'X', 'I', 'N', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void save_model(const std::string& path, const Encoder<float>& enc, const Mlp<float>& mlp) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_model: cannot open " + path);
  f.write(kMagic, 4);
  put(f, kVersion);
  put(f, static_cast<std::int32_t>(enc.cfg.input_dim));
  put(f, static_cast<std::int32_t>(enc.cfg.mapping_size));
  put(f, enc.cfg.scale);
  put(f, enc.cfg.seed);
  put(f, static_cast<std::int32_t>(mlp.cfg.in_dim));
  put(f, static_cast<std::int32_t>(mlp.cfg.hidden));
  put(f, static_cast<std::int32_t>(mlp.cfg.n_layers));
  put(f, mlp.cfg.omega0);
  put(f, mlp.cfg.seed);
  put(f, static_cast<std::uint64_t>(enc.b.size()));
  put(f, static_cast<std::uint64_t>(mlp.params.size()));
  f.write(reinterpret_cast<const char*>(enc.b.data()),
          static_cast<std::streamsize>(sizeof(float) * enc.b.size()));
  f.write(reinterpret_cast<const char*>(mlp.params.data()),
          static_cast<std::streamsize>(sizeof(float) * mlp.params.size()));
  if (!f) throw std::runtime_error("save_model: write failed for " + path);
}

void load_model(const std::string& path, Encoder<float>& enc, Mlp<float>& mlp) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_model: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_model: bad magic in " + path);
  if (get<std::uint32_t>(f) != kVersion)
    throw std::runtime_error("load_model: unsupported version in " + path);

  EncodingConfig ec;
  ec.input_dim = get<std::int32_t>(f);
  ec.mapping_size = get<std::int32_t>(f);
  ec.scale = get<double>(f);
  ec.seed = get<std::uint64_t>(f);
  MlpConfig mc;
  mc.in_dim = get<std::int32_t>(f);
  mc.hidden = get<std::int32_t>(f);
  mc.n_layers = get<std::int32_t>(f);
  mc.omega0 = get<double>(f);
  mc.seed = get<std::uint64_t>(f);
  const auto b_count = get<std::uint64_t>(f);
  const auto p_count = get<std::uint64_t>(f);

  enc = Encoder<float>();
  enc.cfg = ec;
  enc.b.resize(b_count);
  f.read(reinterpret_cast<char*>(enc.b.data()),
         static_cast<std::streamsize>(sizeof(float) * b_count));
  mlp = Mlp<float>(mc, false);
  if (p_count != mlp.n_params())
    throw std::runtime_error("load_model: parameter count does not match config in " + path);
  f.read(reinterpret_cast<char*>(mlp.params.data()),
         static_cast<std::streamsize>(sizeof(float) * p_count));
  if (!f) throw std::runtime_error("load_model: truncated file " + path);
}

}  // namespace xct
