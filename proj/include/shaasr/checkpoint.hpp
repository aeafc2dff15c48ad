// shaasr/checkpoint.hpp

// Copyright 2026  The shaasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAASR_CHECKPOINT_HPP_
#define SHAASR_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "shaasr/io.hpp"
#include "shaasr/model.hpp"

namespace shaasr {

// Checkpoint layout (all little-endian):
//   8 bytes   magic "SHAASRCK"
//   u32       version (1)
//   u32       kind (0 = SingleHead, 1 = SHA)
//   u64 x 6   feature_dim, num_shared_blocks, hidden_dim, num_chenones,
//             split_depth, lookahead
//   then per parameter tensor in declaration order:
//   u32 rank, u64 dims..., f64 data...
// Round-trips are bit-exact.

inline constexpr char kCheckpointMagic[8] = {'S', 'H', 'A', 'A', 'S', 'R', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind : std::uint32_t { single = 0, sha = 1 };

namespace detail {

inline void write_tensor(std::ostream& os, const Tensor& t) {
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) write_pod<std::uint64_t>(os, d);
  os.write(reinterpret_cast<const char*>(t.data().data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

inline void read_tensor_into(std::istream& is, Tensor& t, const std::string& name) {
  auto rank = read_pod<std::uint32_t>(is, name.c_str());
  SHAASR_CHECK(rank == t.rank(), ErrKind::kData,
               "parse error: checkpoint tensor %s rank %u, model wants %zu", name.c_str(),
               rank, t.rank());
  for (std::size_t i = 0; i < t.rank(); ++i) {
    auto d = read_pod<std::uint64_t>(is, name.c_str());
    SHAASR_CHECK(d == t.shape()[i], ErrKind::kData,
                 "parse error: checkpoint tensor %s dim %zu is %llu, model wants %zu",
                 name.c_str(), i, static_cast<unsigned long long>(d), t.shape()[i]);
  }
  is.read(reinterpret_cast<char*>(t.data().data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  SHAASR_CHECK(is.good(), ErrKind::kData, "parse error: truncated checkpoint at %s",
               name.c_str());
}

inline void write_header(std::ostream& os, ModelKind kind, const ModelConfig& cfg) {
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod<std::uint32_t>(os, kCheckpointVersion);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
  write_pod<std::uint64_t>(os, cfg.feature_dim);
  write_pod<std::uint64_t>(os, cfg.num_shared_blocks);
  write_pod<std::uint64_t>(os, cfg.hidden_dim);
  write_pod<std::uint64_t>(os, cfg.num_chenones);
  write_pod<std::uint64_t>(os, cfg.split_depth);
  write_pod<std::uint64_t>(os, cfg.lookahead);
}

inline ModelKind read_header(std::istream& is, ModelConfig& cfg,
                             const std::filesystem::path& path) {
  char magic[8];
  is.read(magic, sizeof(magic));
  SHAASR_CHECK(is.good() && std::memcmp(magic, kCheckpointMagic, 8) == 0, ErrKind::kData,
               "parse error: %s is not a checkpoint (bad magic)", path.string().c_str());
  auto version = read_pod<std::uint32_t>(is, "version");
  SHAASR_CHECK(version == kCheckpointVersion, ErrKind::kData,
               "parse error: unsupported checkpoint version %u", version);
  auto kind = read_pod<std::uint32_t>(is, "kind");
  SHAASR_CHECK(kind <= 1, ErrKind::kData, "parse error: unknown model kind %u", kind);
  cfg.feature_dim = read_pod<std::uint64_t>(is, "feature_dim");
  cfg.num_shared_blocks = read_pod<std::uint64_t>(is, "num_shared_blocks");
  cfg.hidden_dim = read_pod<std::uint64_t>(is, "hidden_dim");
  cfg.num_chenones = read_pod<std::uint64_t>(is, "num_chenones");
  cfg.split_depth = read_pod<std::uint64_t>(is, "split_depth");
  cfg.lookahead = read_pod<std::uint64_t>(is, "lookahead");
  cfg.validate();
  return static_cast<ModelKind>(kind);
}

}  // namespace detail

template <class Model>
void save_checkpoint(const Model& m, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  SHAASR_CHECK(os.good(), ErrKind::kData, "data error: cannot write %s",
               path.string().c_str());
  constexpr ModelKind kind =
      std::is_same_v<Model, SingleHeadModel> ? ModelKind::single : ModelKind::sha;
  detail::write_header(os, kind, m.cfg);
  for_each_param(const_cast<Model&>(m),
                 [&os](ParamGroup, const std::string&, Tensor& t) {
                   detail::write_tensor(os, t);
                 });
  os.flush();
  SHAASR_CHECK(os.good(), ErrKind::kData, "data error: write failed for %s",
               path.string().c_str());
}

inline ModelKind peek_checkpoint_kind(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  SHAASR_CHECK(is.good(), ErrKind::kData, "data error: cannot open %s",
               path.string().c_str());
  ModelConfig cfg;
  return detail::read_header(is, cfg, path);
}

template <class Model>
Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  SHAASR_CHECK(is.good(), ErrKind::kData, "data error: cannot open %s",
               path.string().c_str());
  ModelConfig cfg;
  ModelKind kind = detail::read_header(is, cfg, path);
  constexpr ModelKind want =
      std::is_same_v<Model, SingleHeadModel> ? ModelKind::single : ModelKind::sha;
  SHAASR_CHECK(kind == want, ErrKind::kData,
               "data error: checkpoint %s holds a different model kind",
               path.string().c_str());
  Model m;
  if constexpr (std::is_same_v<Model, SingleHeadModel>) {
    m = make_singlehead(cfg, 0);
  } else {
    m = split_from_single(make_singlehead(cfg, 0), 0);
  }
  for_each_param(m, [&is](ParamGroup, const std::string& name, Tensor& t) {
    detail::read_tensor_into(is, t, name);
  });
  // must now be at EOF
  is.peek();
  SHAASR_CHECK(is.eof(), ErrKind::kData, "parse error: trailing bytes in %s",
               path.string().c_str());
  return m;
}

}  // namespace shaasr

#endif  // SHAASR_CHECKPOINT_HPP_
