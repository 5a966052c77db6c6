#include "checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace siatext {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'I', 'A', 'T'};

uint32_t crc32(const char* data, size_t n) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
      t[i] = c;
    }
    return t;
  }();
  uint32_t c = 0xFFFFFFFFu;
  for (size_t i = 0; i < n; ++i) {
    c = table[(c ^ static_cast<unsigned char>(data[i])) & 0xFF] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

struct Writer {
  std::string buf;

  void u32(uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) {
      buf.push_back(static_cast<char>((v >> shift) & 0xFF));
    }
  }
  void u64(uint64_t v) {
    for (int shift = 0; shift < 64; shift += 8) {
      buf.push_back(static_cast<char>((v >> shift) & 0xFF));
    }
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u32(bits);
  }
  void bytes(const char* data, size_t n) { buf.append(data, n); }
  void floats(const std::vector<float>& values) {
    for (float v : values) f32(v);
  }
};

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  size_t limit;  // body ends here; the CRC trailer lies beyond

  Reader(const std::string& b, size_t lim) : buf(b), limit(lim) {}

  void need(size_t n) {
    if (pos + n > limit) {
      throw FormatError(FormatErrorKind::truncated, "checkpoint file is truncated");
    }
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int shift = 0; shift < 32; shift += 8) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos++])) << shift;
    }
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 8) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos++])) << shift;
    }
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string out = buf.substr(pos, n);
    pos += n;
    return out;
  }
  void floats(std::vector<float>& values) {
    for (float& v : values) v = f32();
  }
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const Params<float>& p = ckpt.params;
  if (p.vocab_size != ckpt.vocab.size()) {
    throw Error(ErrorCategory::invalid_argument,
                "parameter vocab_size does not match the vocabulary");
  }

  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.u32(p.vocab_size);
  w.u32(p.embed_dim);
  w.u32(p.hidden_dim);
  w.u32(p.output_dim);
  w.f32(ckpt.net.init_scale);
  w.u64(ckpt.net.seed);
  w.f32(ckpt.margin);

  w.u32(static_cast<uint32_t>(ckpt.vocab.trigrams.size()));
  for (const std::string& tri : ckpt.vocab.trigrams) {
    w.u32(static_cast<uint32_t>(tri.size()));
    w.bytes(tri.data(), tri.size());
  }

  for (auto ref : p.arrays()) {
    w.floats(*ref.values);
  }

  w.u32(crc32(w.buf.data(), w.buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open checkpoint for writing: " + path);
  }
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!out.flush()) {
    throw Error(ErrorCategory::io, "failed writing checkpoint: " + path);
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open checkpoint: " + path);
  }
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < kMagic.size() + 8) {
    throw FormatError(FormatErrorKind::truncated, "checkpoint file is truncated");
  }
  if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError(FormatErrorKind::bad_magic, "not a checkpoint file (bad magic)");
  }

  Reader header(buf, buf.size());
  header.pos = kMagic.size();
  const uint32_t version = header.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(FormatErrorKind::version_mismatch,
                      "unsupported checkpoint version " + std::to_string(version));
  }

  Reader r(buf, buf.size() - 4);
  r.pos = header.pos;

  Checkpoint ckpt;
  ckpt.net.vocab_size = r.u32();
  ckpt.net.embed_dim = r.u32();
  ckpt.net.hidden_dim = r.u32();
  ckpt.net.output_dim = r.u32();
  ckpt.net.init_scale = r.f32();
  ckpt.net.seed = r.u64();
  ckpt.margin = r.f32();
  if (ckpt.net.vocab_size == 0 || ckpt.net.embed_dim == 0 || ckpt.net.hidden_dim == 0 ||
      ckpt.net.output_dim == 0) {
    throw FormatError(FormatErrorKind::truncated, "checkpoint header declares zero dimensions");
  }

  const uint32_t trigram_count = r.u32();
  if (trigram_count + 1 != ckpt.net.vocab_size) {
    throw FormatError(FormatErrorKind::truncated,
                      "vocabulary entry count disagrees with the header");
  }
  for (uint32_t i = 0; i < trigram_count; ++i) {
    const uint32_t len = r.u32();
    std::string tri = r.bytes(len);
    auto [it, inserted] = ckpt.vocab.index_of.emplace(tri, i + 1);
    if (!inserted) {
      throw FormatError(FormatErrorKind::truncated, "duplicate vocabulary entry");
    }
    ckpt.vocab.trigrams.push_back(std::move(tri));
  }

  Params<float>& p = ckpt.params;
  p.vocab_size = ckpt.net.vocab_size;
  p.embed_dim = ckpt.net.embed_dim;
  p.hidden_dim = ckpt.net.hidden_dim;
  p.output_dim = ckpt.net.output_dim;
  const size_t h = p.hidden_dim;
  p.embedding = Matrix<float>(p.vocab_size, p.embed_dim);
  p.cell.w = Matrix<float>(4 * h, p.embed_dim);
  p.cell.u = Matrix<float>(4 * h, h);
  p.cell.b.assign(4 * h, 0.0f);
  p.dense_w = Matrix<float>(p.output_dim, 2 * h);
  p.dense_b.assign(p.output_dim, 0.0f);
  for (auto ref : p.arrays()) {
    r.floats(*ref.values);
  }

  if (r.pos != buf.size() - 4) {
    throw FormatError(FormatErrorKind::truncated,
                      "checkpoint length disagrees with the declared shapes");
  }
  Reader trailer(buf, buf.size());
  trailer.pos = buf.size() - 4;
  const uint32_t stored = trailer.u32();
  const uint32_t actual = crc32(buf.data(), buf.size() - 4);
  if (stored != actual) {
    throw FormatError(FormatErrorKind::checksum_mismatch, "checkpoint checksum failure");
  }
  return ckpt;
}

}  // namespace siatext
