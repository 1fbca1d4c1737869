#include "ionpf/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json_io.hpp"

namespace ionpf {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic{'I', 'O', 'N', 'P', 'F', 'S', 'N', 'P'};
// Guards against absurd allocations on corrupted input.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u64(std::uint64_t v) { pod(v); }
  void f64(double v) { pod(v); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void vec(const Eigen::VectorXd& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  template <int R, int C>
  void fixed(const Eigen::Matrix<double, R, C>& m) {
    out_.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(R * C * sizeof(double)));
  }
  void weights(const LogWeights& w) {
    u64(w.size());
    for (double v : w.log_values()) f64(v);
  }
  void indices(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (auto i : v) u64(i);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw SnapshotError("snapshot: unexpected end of data");
    return v;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::uint64_t count() {
    const auto n = u64();
    if (n > kMaxCount) throw SnapshotError("snapshot: corrupt element count");
    return n;
  }
  std::string str() {
    std::string s(count(), '\0');
    in_.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!in_) throw SnapshotError("snapshot: unexpected end of data");
    return s;
  }
  Eigen::VectorXd vec() {
    Eigen::VectorXd v(static_cast<Eigen::Index>(count()));
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in_) throw SnapshotError("snapshot: unexpected end of data");
    return v;
  }
  template <int R, int C>
  Eigen::Matrix<double, R, C> fixed() {
    Eigen::Matrix<double, R, C> m;
    in_.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(R * C * sizeof(double)));
    if (!in_) throw SnapshotError("snapshot: unexpected end of data");
    return m;
  }
  LogWeights weights() {
    std::vector<double> v(count());
    for (auto& x : v) x = f64();
    return LogWeights(std::move(v));
  }
  std::vector<std::size_t> indices() {
    std::vector<std::size_t> v(count());
    for (auto& x : v) x = u64();
    return v;
  }

 private:
  std::istream& in_;
};

void write_belief(Writer& w, const GaussianBelief& b) {
  w.fixed(b.mean);
  w.fixed(b.cov);
}

GaussianBelief read_belief(Reader& r) {
  GaussianBelief b;
  b.mean = r.fixed<3, 1>();
  b.cov = r.fixed<3, 3>();
  return b;
}

void write_particle(Writer& w, const OuterParticle& p) {
  w.fixed(p.z.x);
  w.u64(p.z.xi_prev ? 1 : 0);
  w.f64(p.z.xi_prev.value_or(0.0));
  w.u64(p.cloud.particles.size());
  for (const auto& th : p.cloud.particles) w.fixed(th);
  w.weights(p.cloud.log_weights);
  w.indices(p.cloud.ancestors);
  w.u64(p.belief ? 1 : 0);
  if (p.belief) write_belief(w, *p.belief);
  w.vec(p.policy_state);
  w.f64(p.log_marginal);
  w.u64(p.ancestor);
}

OuterParticle read_particle(Reader& r) {
  OuterParticle p;
  p.z.x = r.fixed<2, 1>();
  const bool has_xi = r.u64() != 0;
  const double xi = r.f64();
  if (has_xi) p.z.xi_prev = xi;
  p.cloud.particles.resize(r.count());
  for (auto& th : p.cloud.particles) th = r.fixed<3, 1>();
  p.cloud.log_weights = r.weights();
  p.cloud.ancestors = r.indices();
  if (r.u64() != 0) p.belief = read_belief(r);
  p.policy_state = r.vec();
  p.log_marginal = r.f64();
  p.ancestor = r.u64();
  return p;
}

}  // namespace

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.pod(kSnapshotVersion);

  w.f64(snap.model.dt);
  w.u64(snap.model.horizon);
  w.f64(snap.model.diffusion);
  w.fixed(snap.model.x0);
  write_belief(w, snap.model.prior);

  w.str(detail::arch_to_json(snap.arch).dump());
  w.vec(snap.params);

  const auto& h = snap.history;
  const auto& c = h.config;
  w.u64(c.N);
  w.u64(c.M);
  w.f64(c.eta);
  w.f64(c.slew_penalty);
  w.str(to_string(c.strategy));
  w.u64(c.ibis.moves);
  w.f64(c.ibis.ridge);
  w.f64(c.jitter_factor);
  w.fixed(h.jitter.base_scale);
  w.u64(h.jitter.M);
  w.u64(h.jitter.clamp ? 1 : 0);
  if (h.jitter.clamp) {
    w.fixed(h.jitter.clamp->first);
    w.fixed(h.jitter.clamp->second);
  }
  w.f64(h.log_evidence);
  w.u64(h.ibis_stats.proposed);
  w.u64(h.ibis_stats.accepted);
  w.u64(h.frames.size());
  for (const auto& f : h.frames) {
    w.u64(f.t);
    w.weights(f.log_weights);
    w.u64(f.particles.size());
    for (const auto& p : f.particles) write_particle(w, p);
  }
  if (!out) throw SnapshotError("snapshot: write failed");
}

Snapshot read_snapshot(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw SnapshotError("snapshot: not a filter snapshot");
  Reader r(in);
  const auto version = r.pod<std::uint32_t>();
  if (version != kSnapshotVersion)
    throw SnapshotError("snapshot: version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kSnapshotVersion) + ")");

  Snapshot snap;
  snap.model.dt = r.f64();
  snap.model.horizon = r.u64();
  snap.model.diffusion = r.f64();
  snap.model.x0 = r.fixed<2, 1>();
  snap.model.prior = read_belief(r);

  try {
    snap.arch = detail::arch_from_json(nlohmann::json::parse(r.str()));
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("snapshot: bad policy header: ") + e.what());
  }
  snap.params = r.vec();

  auto& h = snap.history;
  auto& c = h.config;
  c.N = r.u64();
  c.M = r.u64();
  c.eta = r.f64();
  c.slew_penalty = r.f64();
  try {
    c.strategy = theta_strategy_from_string(r.str());
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot: ") + e.what());
  }
  c.ibis.moves = r.u64();
  c.ibis.ridge = r.f64();
  c.jitter_factor = r.f64();
  h.jitter.base_scale = r.fixed<3, 1>();
  h.jitter.M = r.u64();
  if (r.u64() != 0) {
    const Theta lo = r.fixed<3, 1>();
    const Theta hi = r.fixed<3, 1>();
    h.jitter.clamp = std::make_pair(lo, hi);
  }
  h.log_evidence = r.f64();
  h.ibis_stats.proposed = r.u64();
  h.ibis_stats.accepted = r.u64();
  h.frames.resize(r.count());
  for (auto& f : h.frames) {
    f.t = r.u64();
    f.log_weights = r.weights();
    f.particles.resize(r.count());
    for (auto& p : f.particles) p = read_particle(r);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw SnapshotError("snapshot: trailing data");
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("snapshot: cannot open " + path.string() + " for writing");
  write_snapshot(out, snap);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("snapshot: cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace ionpf
