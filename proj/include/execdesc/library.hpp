#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace execdesc::library {

/// Repository URL in canonical form: scheme and host lowercased, query and
/// fragment dropped, trailing slashes and `.git` suffixes removed.
class RepoKey {
public:
  static RepoKey normalize(std::string_view url);
  const std::string &str() const { return normalized_; }

  friend auto operator<=>(const RepoKey &, const RepoKey &) = default;

private:
  explicit RepoKey(std::string normalized) : normalized_(std::move(normalized)) {}
  std::string normalized_;
};

enum class Provenance { Authored, HeuristicDerived };

std::string_view to_string(Provenance provenance);
std::optional<Provenance> parse_provenance(std::string_view text);

struct LibraryRecord {
  std::string id;
  std::string repo;
  std::string document;
  std::string content_hash;
  Provenance provenance = Provenance::Authored;
  std::string submitted_at;

  friend bool operator==(const LibraryRecord &, const LibraryRecord &) = default;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Current UTC time as 2026-01-31T12:34:56.789Z.
std::string utc_timestamp();

class LibraryError : public std::runtime_error {
public:
  LibraryError(std::string endpoint, int status, const std::string &message)
      : std::runtime_error(endpoint + ": " + message), endpoint_(std::move(endpoint)), status_(status) {}

  const std::string &endpoint() const { return endpoint_; }
  /// HTTP status, or 0 for transport failures and client-side rejections.
  int status() const { return status_; }

private:
  std::string endpoint_;
  int status_;
};

/// The client-side gate refused a document before any network call.
class DocumentRejected : public LibraryError {
public:
  using LibraryError::LibraryError;
};

/// Records for `repo`, newest first; empty when the library has none.
std::vector<LibraryRecord> fetch(const std::string &endpoint, const RepoKey &repo);

/// Uploads `document` after checking locally that it parses and describes at
/// least one process. Re-publishing identical bytes returns the stored record.
LibraryRecord publish(const std::string &endpoint, const RepoKey &repo, const std::string &document,
                      Provenance provenance);

/// Append-only store: `records.jsonl` under the store directory, one JSON
/// record per line, indexed in memory when opened.
class RecordStore {
public:
  explicit RecordStore(std::filesystem::path directory);

  struct Published {
    LibraryRecord record;
    bool created = false;
  };

  /// Idempotent on (repo, content hash). Appends are serialized and synced
  /// to disk before returning.
  Published publish(const RepoKey &repo, const std::string &document, Provenance provenance);

  /// Newest first, record id breaking ties.
  std::vector<LibraryRecord> find(const RepoKey &repo) const;
  std::size_t size() const;
  /// Lines that could not be read back when the store was opened.
  std::size_t skipped_lines() const { return skipped_lines_; }

private:
  using Index = std::map<std::string, std::vector<LibraryRecord>>;

  std::filesystem::path log_path_;
  std::mutex write_mutex_;
  std::shared_ptr<const Index> index_;
  std::size_t skipped_lines_ = 0;
  long long last_ms_ = 0;
};

/// Reference HTTP server for the library protocol:
///   GET  /v1/descriptions?repo=<url>   200 {"records":[...]} or 404
///   POST /v1/descriptions              201 created, 200 duplicate, 400 rejected
///   GET  /v1/health                    200
class LibraryServer {
public:
  explicit LibraryServer(std::filesystem::path store_dir);
  ~LibraryServer();
  LibraryServer(const LibraryServer &) = delete;
  LibraryServer &operator=(const LibraryServer &) = delete;

  /// Binds and starts serving on a background thread; port 0 picks a free
  /// port. Returns the bound port. Throws std::runtime_error on bind failure.
  int start(const std::string &host, int port);
  /// Serves on the calling thread until stop() is called from elsewhere.
  void run(const std::string &host, int port, const std::function<void(int)> &on_bound = {});
  void stop();

  const RecordStore &store() const { return store_; }

private:
  void install_routes();

  RecordStore store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

} // namespace execdesc::library
