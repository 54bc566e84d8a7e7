#include "rh/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>

#include <fmt/core.h>
#include "json.hpp"

#include "rh/archive.hpp"
#include "rh/error.hpp"

namespace rh {
namespace {

constexpr std::string_view kMagic = "RHNET 1\n";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_block(std::string& out, const std::string& name, std::uint32_t rows, std::uint32_t cols,
               const double* values) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put_u32(out, rows);
  put_u32(out, cols);
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) put_f64(out, values[i]);
}

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw FormatError("checkpoint is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

struct RawBlock {
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> values;
};

}  // namespace

std::string encode_checkpoint(const ValueNet& net) {
  std::string out(kMagic);
  const auto& s = net.shape();
  std::vector<double> shape = {double(s.node_in), double(s.edge_in), double(s.ego_in),
                               double(s.hidden),  double(s.layers),  double(s.embed)};
  for (int w : s.head) shape.push_back(w);
  const double affine[2] = {net.output_offset(), net.output_scale()};
  put_u32(out, static_cast<std::uint32_t>(net.blocks().size() + 2));
  put_block(out, "meta.shape", 1, static_cast<std::uint32_t>(shape.size()), shape.data());
  put_block(out, "meta.output", 1, 2, affine);
  for (const ParamBlock& b : net.blocks()) {
    put_block(out, b.name, static_cast<std::uint32_t>(b.rows), static_cast<std::uint32_t>(b.cols),
              net.params().data() + b.offset);
  }
  return out;
}

ValueNet decode_checkpoint(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) {
    throw FormatError("not a value-network checkpoint (missing RHNET 1 header)");
  }
  Reader r(bytes);
  r.bytes(kMagic.size());
  const std::uint32_t count = r.u32();
  std::map<std::string, RawBlock> blocks;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.bytes(r.u32());
    RawBlock b;
    b.rows = r.u32();
    b.cols = r.u32();
    const std::size_t n = static_cast<std::size_t>(b.rows) * b.cols;
    r.need(n * 8);
    b.values.resize(n);
    for (double& v : b.values) v = r.f64();
    blocks[name] = std::move(b);
  }
  if (!r.done()) throw FormatError("trailing bytes after the last checkpoint block");
  auto take = [&](const std::string& name) -> RawBlock& {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw FormatError(fmt::format("checkpoint lacks block '{}'", name));
    return it->second;
  };
  const RawBlock& sh = take("meta.shape");
  if (sh.values.size() < 6) throw FormatError("checkpoint shape block is too short");
  NetShape shape;
  shape.node_in = static_cast<int>(sh.values[0]);
  shape.edge_in = static_cast<int>(sh.values[1]);
  shape.ego_in = static_cast<int>(sh.values[2]);
  shape.hidden = static_cast<int>(sh.values[3]);
  shape.layers = static_cast<int>(sh.values[4]);
  shape.embed = static_cast<int>(sh.values[5]);
  shape.head.assign(sh.values.begin() + 6, sh.values.end());
  ValueNet net(shape);
  const RawBlock& aff = take("meta.output");
  if (aff.values.size() != 2) throw FormatError("checkpoint output block must hold 2 values");
  net.set_output_affine(aff.values[0], aff.values[1]);
  for (const ParamBlock& b : net.blocks()) {
    const RawBlock& raw = take(b.name);
    if (raw.rows != static_cast<std::uint32_t>(b.rows) || raw.cols != static_cast<std::uint32_t>(b.cols)) {
      throw FormatError(fmt::format("block '{}' has shape {}x{}, expected {}x{}", b.name, raw.rows,
                                    raw.cols, b.rows, b.cols));
    }
    std::copy(raw.values.begin(), raw.values.end(), net.params().begin() + static_cast<std::ptrdiff_t>(b.offset));
  }
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const ValueNet& net,
                     const std::string& extra_json) {
  write_text_file(path, encode_checkpoint(net));
  nlohmann::ordered_json j;
  j["format"] = "RHNET 1";
  const auto& s = net.shape();
  j["shape"] = {{"node_in", s.node_in}, {"edge_in", s.edge_in}, {"ego_in", s.ego_in},
                {"hidden", s.hidden},   {"layers", s.layers},   {"embed", s.embed},
                {"head", s.head}};
  j["parameters"] = net.size();
  j["output_offset"] = net.output_offset();
  j["output_scale"] = net.output_scale();
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (const ParamBlock& b : net.blocks()) blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}});
  j["blocks"] = blocks;
  j["extra"] = nlohmann::ordered_json::parse(extra_json);
  write_text_file(path.string() + ".json", j.dump(2) + "\n");
}

ValueNet load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_text_file(path));
}

}  // namespace rh
