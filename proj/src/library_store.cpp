#include "execdesc/library.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include <json.hpp>

namespace execdesc::library {

namespace {

bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
  });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string format_ms(long long ms) {
  std::time_t seconds = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buffer, ms % 1000);
  return out;
}

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

nlohmann::json to_json(const LibraryRecord &r) {
  return {{"id", r.id},
          {"repo", r.repo},
          {"document", r.document},
          {"content_hash", r.content_hash},
          {"provenance", to_string(r.provenance)},
          {"submitted_at", r.submitted_at}};
}

void sort_newest_first(std::vector<LibraryRecord> &records) {
  std::sort(records.begin(), records.end(), [](const auto &a, const auto &b) {
    if (a.submitted_at != b.submitted_at) return a.submitted_at > b.submitted_at;
    return a.id < b.id;
  });
}

} // namespace

RepoKey RepoKey::normalize(std::string_view url) {
  url = url.substr(0, url.find_first_of("?#"));
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.front()))) url.remove_prefix(1);
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.back()))) url.remove_suffix(1);

  std::string head;
  std::string_view path = url;
  if (auto sep = url.find("://"); sep != std::string_view::npos && valid_scheme(url.substr(0, sep))) {
    std::string_view rest = url.substr(sep + 3);
    auto slash = rest.find('/');
    std::string_view authority = rest.substr(0, slash);
    path = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash);
    auto at = authority.rfind('@');
    std::string userinfo = at == std::string_view::npos ? std::string{} : std::string(authority.substr(0, at + 1));
    std::string host = lower(at == std::string_view::npos ? authority : authority.substr(at + 1));
    head = lower(url.substr(0, sep)) + "://" + userinfo + host;
  }

  std::string tail(path);
  for (bool changed = true; changed;) {
    changed = false;
    while (tail.ends_with('/') || (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.back())))) {
      tail.pop_back();
      changed = true;
    }
    if (tail.ends_with(".git")) {
      tail.resize(tail.size() - 4);
      changed = true;
    }
  }
  return RepoKey(head + tail);
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::Authored ? "authored" : "heuristic-derived";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
  if (text == "authored") return Provenance::Authored;
  if (text == "heuristic-derived") return Provenance::HeuristicDerived;
  return std::nullopt;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string utc_timestamp() { return format_ms(now_ms()); }

RecordStore::RecordStore(std::filesystem::path directory) {
  std::filesystem::create_directories(directory);
  log_path_ = directory / "records.jsonl";

  auto index = std::make_shared<Index>();
  std::ifstream in(log_path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      LibraryRecord r;
      r.id = j.at("id").get<std::string>();
      r.repo = j.at("repo").get<std::string>();
      r.document = j.at("document").get<std::string>();
      r.content_hash = j.at("content_hash").get<std::string>();
      r.submitted_at = j.at("submitted_at").get<std::string>();
      auto provenance = parse_provenance(j.at("provenance").get<std::string>());
      if (!provenance || sha256_hex(r.document) != r.content_hash) {
        ++skipped_lines_;
        continue;
      }
      r.provenance = *provenance;
      auto &records = (*index)[r.repo];
      if (std::any_of(records.begin(), records.end(),
                      [&](const auto &x) { return x.content_hash == r.content_hash; })) {
        continue;
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception &) {
      // A torn final line from an interrupted append.
      ++skipped_lines_;
    }
  }
  for (auto &[_, records] : *index) {
    sort_newest_first(records);
    if (!records.empty()) {
      // Resume the clock after the newest stored record.
      std::tm tm{};
      int ms = 0;
      if (std::sscanf(records.front().submitted_at.c_str(), "%d-%d-%dT%d:%d:%d.%dZ", &tm.tm_year, &tm.tm_mon,
                      &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms) == 7) {
        tm.tm_year -= 1900;
        tm.tm_mon -= 1;
        last_ms_ = std::max(last_ms_, static_cast<long long>(timegm(&tm)) * 1000 + ms);
      }
    }
  }
  std::atomic_store(&index_, std::shared_ptr<const Index>(std::move(index)));
}

RecordStore::Published RecordStore::publish(const RepoKey &repo, const std::string &document,
                                            Provenance provenance) {
  std::lock_guard guard(write_mutex_);
  auto snapshot = std::atomic_load(&index_);
  auto hash = sha256_hex(document);
  if (auto it = snapshot->find(repo.str()); it != snapshot->end()) {
    for (const auto &r : it->second) {
      if (r.content_hash == hash) return {r, false};
    }
  }

  last_ms_ = std::max(now_ms(), last_ms_ + 1);
  LibraryRecord record{sha256_hex(repo.str() + "\n" + hash).substr(0, 16), repo.str(), document, hash,
                       provenance, format_ms(last_ms_)};

  std::string line = to_json(record).dump() + "\n";
  int fd = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot open " + log_path_.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < line.size()) {
    auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) {
      ::close(fd);
      throw std::runtime_error("cannot append to " + log_path_.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);

  auto next = std::make_shared<Index>(*snapshot);
  auto &records = (*next)[record.repo];
  records.push_back(record);
  sort_newest_first(records);
  std::atomic_store(&index_, std::shared_ptr<const Index>(std::move(next)));
  return {record, true};
}

std::vector<LibraryRecord> RecordStore::find(const RepoKey &repo) const {
  auto snapshot = std::atomic_load(&index_);
  auto it = snapshot->find(repo.str());
  return it == snapshot->end() ? std::vector<LibraryRecord>{} : it->second;
}

std::size_t RecordStore::size() const {
  auto snapshot = std::atomic_load(&index_);
  std::size_t n = 0;
  for (const auto &[_, records] : *snapshot) n += records.size();
  return n;
}

} // namespace execdesc::library
