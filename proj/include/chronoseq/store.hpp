#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chronoseq {

/// Directory of immutable artifacts, one file per (kind, id):
///
///   <root>/<kind>/<id>.art
///
/// Each file is a one-line JSON header {format, kind, id, sha256, bytes}
/// followed by the payload. Reads verify the payload digest. Writes go to a
/// temporary file that is renamed into place.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Stores a payload; rewriting an existing id with identical bytes is a no-op.
  std::filesystem::path put(std::string_view kind, std::string_view id, std::string_view payload);

  /// Payload of an artifact. Throws Error{not_found} or Error{checksum}.
  std::string get(std::string_view kind, std::string_view id) const;

  bool contains(std::string_view kind, std::string_view id) const;
  std::vector<std::string> list(std::string_view kind) const;
  std::filesystem::path path_of(std::string_view kind, std::string_view id) const;

  /// Small mutable index (heads, lineage) kept beside the artifacts.
  nlohmann::json read_index() const;
  /// Read-modify-write of the index under the store's lock.
  void update_index(const std::function<void(nlohmann::json&)>& edit);

 private:
  std::filesystem::path root_;
  mutable std::mutex index_mutex_;
};

/// Writes `bytes` to `path` through a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace chronoseq
