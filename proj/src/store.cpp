#include "chronoseq/store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "chronoseq/error.hpp"
#include "chronoseq/hash.hpp"

namespace chronoseq {
namespace fs = std::filesystem;

namespace {
constexpr std::string_view kFormat = "chronoseq-artifact/1";

void check_name(std::string_view s, const char* what) {
  if (s.empty()) fail(ErrorCode::validation, std::string("empty artifact ") + what);
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) fail(ErrorCode::validation, std::string("invalid artifact ") + what + " '" + std::string(s) + "'");
  }
}
}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned long> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp-" << std::this_thread::get_id() << "-" << counter++;
  const fs::path tmp = path.string() + suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::internal, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::internal, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path ArtifactStore::path_of(std::string_view kind, std::string_view id) const {
  check_name(kind, "kind");
  check_name(id, "id");
  return root_ / std::string(kind) / (std::string(id) + ".art");
}

fs::path ArtifactStore::put(std::string_view kind, std::string_view id, std::string_view payload) {
  const fs::path path = path_of(kind, id);
  nlohmann::json header{{"format", kFormat},
                        {"kind", kind},
                        {"id", id},
                        {"sha256", sha256_hex(payload)},
                        {"bytes", payload.size()}};
  std::string bytes = header.dump();
  bytes += '\n';
  bytes.append(payload);
  if (fs::exists(path)) {
    try {
      if (read_file(path) == bytes) return path;
    } catch (const Error&) {
    }
  }
  write_file_atomic(path, bytes);
  return path;
}

std::string ArtifactStore::get(std::string_view kind, std::string_view id) const {
  const fs::path path = path_of(kind, id);
  if (!fs::exists(path)) fail(ErrorCode::not_found, std::string(kind) + " " + std::string(id) + " not found");
  const std::string bytes = read_file(path);
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) fail(ErrorCode::checksum, "artifact " + std::string(id) + " has no header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::checksum, "artifact " + std::string(id) + " has a corrupt header");
  }
  std::string payload = bytes.substr(nl + 1);
  if (!header.is_object() || header.value("format", "") != kFormat || header.value("id", "") != id ||
      header.value("sha256", "") != sha256_hex(payload)) {
    fail(ErrorCode::checksum, "checksum mismatch for " + std::string(kind) + " " + std::string(id));
  }
  return payload;
}

bool ArtifactStore::contains(std::string_view kind, std::string_view id) const {
  return fs::exists(path_of(kind, id));
}

std::vector<std::string> ArtifactStore::list(std::string_view kind) const {
  std::vector<std::string> ids;
  const fs::path dir = root_ / std::string(kind);
  if (!fs::exists(dir)) return ids;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".art") ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {
nlohmann::json load_index(const fs::path& p) {
  if (!fs::exists(p)) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::checksum, "corrupt index " + p.string());
  }
}
}  // namespace

nlohmann::json ArtifactStore::read_index() const {
  std::lock_guard lock(index_mutex_);
  return load_index(root_ / "index.json");
}

void ArtifactStore::update_index(const std::function<void(nlohmann::json&)>& edit) {
  std::lock_guard lock(index_mutex_);
  auto index = load_index(root_ / "index.json");
  edit(index);
  write_file_atomic(root_ / "index.json", index.dump(2));
}

}  // namespace chronoseq
