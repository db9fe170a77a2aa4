#include "forcesim/dataset.hpp"

#include "forcesim/config.hpp"
#include "forcesim/errors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace forcesim {

void Dataset::add_episode(const std::vector<SupervisionTuple>& episode) {
  episode_lengths.push_back(episode.size());
  tuples.insert(tuples.end(), episode.begin(), episode.end());
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'D', 'S'};

template <typename T>
void put(std::string& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) throw IoFailure("dataset truncated at byte " + std::to_string(pos_));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoFailure("dataset truncated at byte " + std::to_string(pos_));
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_dataset(const Dataset& ds) {
  std::uint64_t total = 0;
  for (auto n : ds.episode_lengths) total += n;
  if (total != ds.tuples.size()) throw LengthMismatch("episode lengths do not sum to the tuple count");
  std::string out;
  out.reserve(32 + 8 * ds.episode_lengths.size() + 8 * kRecordDoubles * ds.tuples.size());
  out.append(kMagic, 4);
  put<std::uint32_t>(out, kDatasetVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.task));
  put<std::uint32_t>(out, ds.horizon);
  put<std::uint64_t>(out, ds.episode_lengths.size());
  put<std::uint64_t>(out, ds.tuples.size());
  for (auto n : ds.episode_lengths) put<std::uint64_t>(out, n);
  for (const auto& t : ds.tuples) {
    for (double v : t.reference) put<double>(out, v);
    for (int i = 0; i < 3; ++i) put<double>(out, t.normal[i]);
    put<double>(out, static_cast<double>(t.contact));
  }
  return out;
}

Dataset decode_dataset(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4) != std::string_view(kMagic, 4)) throw IoFailure("not a dataset file (bad magic)");
  if (const auto v = r.get<std::uint32_t>(); v != kDatasetVersion) {
    throw IoFailure("unsupported dataset version " + std::to_string(v));
  }
  Dataset ds;
  const auto task = r.get<std::uint32_t>();
  if (task > 3) throw IoFailure("bad task id " + std::to_string(task));
  ds.task = static_cast<Task>(task);
  ds.horizon = r.get<std::uint32_t>();
  const auto episodes = r.get<std::uint64_t>();
  const auto count = r.get<std::uint64_t>();
  if (episodes > r.remaining() / 8) throw IoFailure("dataset truncated");
  std::uint64_t total = 0;
  ds.episode_lengths.reserve(episodes);
  for (std::uint64_t i = 0; i < episodes; ++i) {
    ds.episode_lengths.push_back(r.get<std::uint64_t>());
    total += ds.episode_lengths.back();
  }
  if (total != count) throw IoFailure("episode lengths do not sum to the tuple count");
  if (count > r.remaining() / (8 * kRecordDoubles)) throw IoFailure("dataset truncated");
  ds.tuples.resize(count);
  for (auto& t : ds.tuples) {
    for (double& v : t.reference) v = r.get<double>();
    for (int i = 0; i < 3; ++i) t.normal[i] = r.get<double>();
    const double c = r.get<double>();
    if (c != 0.0 && c != 1.0) throw IoFailure("contact flag must be 0 or 1");
    t.contact = static_cast<int>(c);
    (void)rot6d_decode(t.rotation6d());
  }
  if (r.remaining() != 0) throw IoFailure("trailing bytes after dataset");
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  const std::string bytes = encode_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("cannot write " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) { return decode_dataset(read_text_file(path)); }

}  // namespace forcesim
