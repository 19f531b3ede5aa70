#include "cas4dl/checkpoint.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cas4dl {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'S', '4', 'D', 'L', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <typename T>
  void put(const T& value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void put_bytes(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <typename Scalar>
  void put_params(const NetworkParams<Scalar>& p) {
    const std::vector<Scalar> flat = p.flatten();
    put<std::uint64_t>(flat.size());
    out_.write(reinterpret_cast<const char*>(flat.data()),
               static_cast<std::streamsize>(flat.size() * sizeof(Scalar)));
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T value{};
    take(&value, sizeof(T));
    return value;
  }
  std::string get_bytes() {
    const auto size = get<std::uint64_t>();
    if (size > bytes_.size() - offset_) throw std::runtime_error("checkpoint truncated");
    std::string s = bytes_.substr(offset_, size);
    offset_ += size;
    return s;
  }
  template <typename Scalar>
  void get_params(NetworkParams<Scalar>& p) {
    const auto count = get<std::uint64_t>();
    if (static_cast<Eigen::Index>(count) != p.parameter_count())
      throw std::runtime_error("checkpoint parameter count does not match its architecture");
    std::vector<Scalar> flat(count);
    take(flat.data(), count * sizeof(Scalar));
    p.assign_flat(flat);
  }
  bool exhausted() const { return offset_ == bytes_.size(); }

 private:
  void take(void* dst, std::size_t size) {
    if (size > bytes_.size() - offset_) throw std::runtime_error("checkpoint truncated");
    std::memcpy(dst, bytes_.data() + offset_, size);
    offset_ += size;
  }

  const std::string& bytes_;
  std::size_t offset_ = 0;
};

struct Header {
  Architecture arch;
  std::uint32_t scalar_size = 0;
  int stage = 0;
  long step = 0;
  double beta1 = 0, beta2 = 0, epsilon = 0;
  std::string stream_state;
};

Header read_header(Reader& in) {
  char magic[8];
  for (char& c : magic) c = in.get<char>();
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("not a checkpoint file");
  if (in.get<std::uint32_t>() != kVersion) throw std::runtime_error("unsupported checkpoint version");
  Header h;
  h.scalar_size = in.get<std::uint32_t>();
  h.arch.input_dim = in.get<std::int32_t>();
  h.arch.depth = in.get<std::int32_t>();
  h.arch.width = in.get<std::int32_t>();
  h.arch.output_dim = in.get<std::int32_t>();
  const auto activation = in.get<std::int32_t>();
  if (activation < 0 || activation > 2) throw std::runtime_error("checkpoint has an unknown activation");
  h.arch.activation = static_cast<Activation>(activation);
  h.arch.validate();
  h.stage = in.get<std::int32_t>();
  h.step = static_cast<long>(in.get<std::int64_t>());
  h.beta1 = in.get<double>();
  h.beta2 = in.get<double>();
  h.epsilon = in.get<double>();
  h.stream_state = in.get_bytes();
  return h;
}

}  // namespace

template <typename Scalar>
std::string serialize_checkpoint(const Checkpoint<Scalar>& c) {
  Writer out;
  for (char ch : kMagic) out.put(ch);
  out.put<std::uint32_t>(kVersion);
  out.put<std::uint32_t>(sizeof(Scalar));
  const Architecture& a = c.params.arch;
  out.put<std::int32_t>(a.input_dim);
  out.put<std::int32_t>(a.depth);
  out.put<std::int32_t>(a.width);
  out.put<std::int32_t>(a.output_dim);
  out.put<std::int32_t>(static_cast<std::int32_t>(a.activation));
  out.put<std::int32_t>(c.stage);
  out.put<std::int64_t>(c.optimizer.step);
  out.put<double>(c.optimizer.beta1);
  out.put<double>(c.optimizer.beta2);
  out.put<double>(c.optimizer.epsilon);
  out.put_bytes(c.stream.serialize());
  out.put_params(c.params);
  out.put_params(c.optimizer.first_moment);
  out.put_params(c.optimizer.second_moment);
  return out.str();
}

template <typename Scalar>
Checkpoint<Scalar> deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  const Header h = read_header(in);
  if (h.scalar_size != sizeof(Scalar))
    throw std::runtime_error("checkpoint precision does not match the requested scalar type");
  Checkpoint<Scalar> c;
  c.params = NetworkParams<Scalar>::zeros(h.arch);
  c.optimizer = AdamState<Scalar>::fresh(h.arch, h.beta1, h.beta2, h.epsilon);
  c.optimizer.step = h.step;
  c.stage = h.stage;
  c.stream = RandomStream::deserialize(h.stream_state);
  in.get_params(c.params);
  in.get_params(c.optimizer.first_moment);
  in.get_params(c.optimizer.second_moment);
  if (!in.exhausted()) throw std::runtime_error("trailing bytes after checkpoint payload");
  return c;
}

namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& file, const Checkpoint<Scalar>& checkpoint) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + file.string());
  const std::string bytes = serialize_checkpoint(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& file) {
  return deserialize_checkpoint<Scalar>(read_file(file));
}

CheckpointSummary inspect_checkpoint(const std::filesystem::path& file) {
  const std::string bytes = read_file(file);
  Reader in(bytes);
  const Header h = read_header(in);
  CheckpointSummary s;
  s.arch = h.arch;
  s.step = h.step;
  s.stage = h.stage;
  s.beta1 = h.beta1;
  s.beta2 = h.beta2;
  s.epsilon = h.epsilon;
  if (h.scalar_size == sizeof(float)) {
    const auto c = deserialize_checkpoint<float>(bytes);
    s.precision = Precision::Single;
    s.parameter_count = c.params.parameter_count();
    double sq = 0.0;
    for (float v : c.params.flatten()) sq += static_cast<double>(v) * v;
    s.parameter_norm = std::sqrt(sq);
  } else if (h.scalar_size == sizeof(double)) {
    const auto c = deserialize_checkpoint<double>(bytes);
    s.precision = Precision::Double;
    s.parameter_count = c.params.parameter_count();
    double sq = 0.0;
    for (double v : c.params.flatten()) sq += v * v;
    s.parameter_norm = std::sqrt(sq);
  } else {
    throw std::runtime_error("checkpoint has an unsupported scalar size");
  }
  return s;
}

template std::string serialize_checkpoint<float>(const Checkpoint<float>&);
template std::string serialize_checkpoint<double>(const Checkpoint<double>&);
template Checkpoint<float> deserialize_checkpoint<float>(const std::string&);
template Checkpoint<double> deserialize_checkpoint<double>(const std::string&);
template void save_checkpoint<float>(const std::filesystem::path&, const Checkpoint<float>&);
template void save_checkpoint<double>(const std::filesystem::path&, const Checkpoint<double>&);
template Checkpoint<float> load_checkpoint<float>(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint<double>(const std::filesystem::path&);

}  // namespace cas4dl
