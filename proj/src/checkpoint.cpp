#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ptrgeo/error.hpp"
#include "ptrgeo/train.hpp"

namespace ptrgeo::nn {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'R', 'N'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffU));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError("truncated checkpoint");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t task_tag(Task t) {
  switch (t) {
    case Task::hull:
      return 0;
    case Task::delaunay:
      return 1;
    case Task::tsp:
      return 2;
  }
  return 0;
}

}  // namespace

std::string encode_checkpoint(const Model& model) {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, task_tag(model.task()));
  put_u32(out, static_cast<std::uint32_t>(model.hidden()));
  for (const auto& p : model.params()) {
    put_u32(out, static_cast<std::uint32_t>(p.name().size()));
    out += p.name();
    const auto& shape = p.value().shape();
    put_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : p.value().values()) put_f64(out, v);
  }
  return out;
}

Model decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4) != std::string_view(kMagic, 4)) throw ParseError("not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t tag = r.u32();
  if (tag > 2) throw ParseError("unknown task tag " + std::to_string(tag));
  const Task task = tag == 0 ? Task::hull : tag == 1 ? Task::delaunay : Task::tsp;
  const std::uint32_t hidden = r.u32();

  ad::ParamStore params;
  while (!r.done()) {
    const std::uint32_t name_len = r.u32();
    std::string name(r.take(name_len));
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 2) throw ParseError("parameter " + name + " has rank " +
                                                std::to_string(rank));
    ad::Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = r.u32();
      count *= d;
    }
    std::vector<double> values(count);
    for (auto& v : values) v = r.f64();
    try {
      params.add(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
    } catch (const Error& e) {
      throw ParseError(std::string("invalid parameter in checkpoint: ") + e.what());
    }
  }
  Model model = Model::from_params(task, std::move(params));
  if (model.hidden() != hidden) throw ParseError("checkpoint header hidden size disagrees");
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(model);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace ptrgeo::nn
