#include "anosov_lab/cache.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "anosov_lab/io.hpp"

namespace alab {

namespace {

constexpr char kMagic[8] = {'A', 'L', 'B', 'C', 'A', 'C', 'H', '1'};

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint64_t>(s.size()));
    buf_ += s;
  }
  template <class T>
  void vec(const std::vector<T>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
  }
  std::string& data() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& b) : buf_(b) {}
  template <class T>
  bool pod(T& v) {
    if (pos_ + sizeof(T) > buf_.size()) return false;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return true;
  }
  bool str(std::string& s) {
    std::uint64_t n = 0;
    if (!pod(n) || pos_ + n > buf_.size()) return false;
    s.assign(buf_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  template <class T>
  bool vec(std::vector<T>& v) {
    std::uint64_t n = 0;
    if (!pod(n) || n > (buf_.size() - pos_) / sizeof(T)) return false;
    v.resize(n);
    std::memcpy(v.data(), buf_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return true;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::string& buf_;
  std::size_t pos_ = 0;
};

void write_key(Writer& w, const CacheKey& k) {
  w.str(k.presentation_hash);
  w.str(k.representation_hash);
  w.pod(static_cast<std::int32_t>(k.depth));
  w.pod(static_cast<std::uint8_t>(k.jordan));
  w.pod(static_cast<std::uint8_t>(k.attractors));
}

}  // namespace

CacheKey make_cache_key(const Presentation& p, const Representation* rho, int depth, const SpectraOptions& opts) {
  CacheKey k;
  k.presentation_hash = content_hash(p.label());
  if (rho) k.representation_hash = content_hash(rho->to_text());
  k.depth = depth;
  k.jordan = rho && opts.jordan;
  k.attractors = rho && opts.attractors;
  return k;
}

std::string cache_file_name(const CacheKey& key) {
  std::ostringstream os;
  os << "ball-" << key.presentation_hash.substr(0, 12) << "-"
     << (key.representation_hash.empty() ? std::string("none") : key.representation_hash.substr(0, 12)) << "-r"
     << key.depth << (key.jordan ? "j" : "") << (key.attractors ? "u" : "") << ".bin";
  return os.str();
}

void save_cache(const std::string& path, const CacheKey& key, const CachedBall& data) {
  Writer w;
  w.data().append(kMagic, sizeof kMagic);
  write_key(w, key);
  const Ball& b = data.ball;
  w.pod(static_cast<std::int32_t>(b.radius));
  w.vec(b.level_start);
  w.vec(b.parent);
  w.vec(b.last);
  w.vec(b.first_child);
  const BallSpectra& s = data.spectra;
  w.pod(static_cast<std::int32_t>(s.dim));
  w.pod(static_cast<std::uint64_t>(s.count));
  w.vec(s.cartan);
  w.vec(s.jordan);
  w.vec(s.attractor);
  write_file_atomic(path, w.data());
}

std::optional<CachedBall> load_cache(const std::string& path, const CacheKey& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) return std::nullopt;
  Writer expect;
  write_key(expect, key);
  const std::string& kb = expect.data();
  if (buf.compare(sizeof kMagic, kb.size(), kb) != 0) return std::nullopt;
  std::string rest = buf.substr(sizeof kMagic + kb.size());
  Reader r(rest);
  CachedBall out;
  Ball& b = out.ball;
  std::int32_t radius = 0, dim = 0;
  std::uint64_t count = 0;
  BallSpectra& s = out.spectra;
  bool ok = r.pod(radius) && r.vec(b.level_start) && r.vec(b.parent) && r.vec(b.last) && r.vec(b.first_child) &&
            r.pod(dim) && r.pod(count) && r.vec(s.cartan) && r.vec(s.jordan) && r.vec(s.attractor) && r.done();
  if (!ok) return std::nullopt;
  b.radius = radius;
  s.dim = dim;
  s.count = count;
  if (b.radius != key.depth || b.level_start.size() != static_cast<std::size_t>(b.radius) + 2 ||
      b.level_start.back() != b.parent.size() || b.last.size() != b.parent.size())
    return std::nullopt;
  if (!key.representation_hash.empty() &&
      (s.count != b.size() || s.cartan.size() != s.count * static_cast<std::size_t>(s.dim)))
    return std::nullopt;
  return out;
}

}  // namespace alab
