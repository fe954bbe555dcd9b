#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "execdesc/library.hpp"
#include "support/test_support.hpp"

using namespace execdesc::library;
using namespace testsupport;

namespace {

const std::string kDoc = R"(<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
  <process rdf:about="#make"><command>make libs</command></process>
</rdf:RDF>
)";

std::string endpoint_of(int port) { return "http://127.0.0.1:" + std::to_string(port); }

} // namespace

TEST_CASE("repository keys") {
  auto k = [](std::string_view url) { return RepoKey::normalize(url).str(); };
  CHECK(k("https://github.com/Lab/Analysis") == "https://github.com/Lab/Analysis");
  CHECK(k("HTTPS://GitHub.COM/Lab/Analysis.git/") == "https://github.com/Lab/Analysis");
  CHECK(k("https://github.com/Lab/Analysis.git.git//") == "https://github.com/Lab/Analysis");
  CHECK(k("  https://example.com/x?ref=main#readme ") == "https://example.com/x");
  CHECK(k("https://User@Example.com/x") == "https://User@example.com/x");
  CHECK(RepoKey::normalize("https://a/b") == RepoKey::normalize("https://a/b.git"));
}

TEST_CASE("property: normalization is idempotent") {
  std::mt19937 rng(21);
  const std::vector<std::string> pieces{"https://", "HTTP://", "Host.Example", "/", "repo", ".git", "?q=1", "#f",
                                        " ", "user@", ":8080", "/.git", "git@x:y", "A"};
  for (int i = 0; i < 1000; ++i) {
    std::string url;
    for (int n = std::uniform_int_distribution<int>(0, 7)(rng); n > 0; --n) {
      url += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    }
    auto once = RepoKey::normalize(url);
    CAPTURE(url);
    CHECK(RepoKey::normalize(once.str()) == once);
  }
}

TEST_CASE("hashing and provenance names") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_string(Provenance::Authored) == "authored");
  CHECK(to_string(Provenance::HeuristicDerived) == "heuristic-derived");
  CHECK(parse_provenance("heuristic-derived") == Provenance::HeuristicDerived);
  CHECK_FALSE(parse_provenance("guessed"));
  auto stamp = utc_timestamp();
  CHECK(stamp.size() == 24);
  CHECK(stamp.back() == 'Z');
}

TEST_CASE("record store: idempotent, newest first, persistent") {
  TempDir dir;
  auto repo = RepoKey::normalize("https://example.com/a");
  std::string first_id;
  {
    RecordStore store(dir.path());
    auto a = store.publish(repo, kDoc, Provenance::Authored);
    CHECK(a.created);
    CHECK(a.record.content_hash == sha256_hex(kDoc));
    CHECK(a.record.repo == repo.str());
    auto again = store.publish(repo, kDoc, Provenance::HeuristicDerived);
    CHECK_FALSE(again.created);
    CHECK(again.record == a.record);
    auto b = store.publish(repo, kDoc + " ", Provenance::HeuristicDerived);
    CHECK(b.created);
    CHECK(b.record.submitted_at > a.record.submitted_at);
    auto found = store.find(repo);
    REQUIRE(found.size() == 2);
    CHECK(found[0] == b.record);
    CHECK(found[1] == a.record);
    CHECK(store.find(RepoKey::normalize("https://example.com/b")).empty());
    first_id = a.record.id;
  }
  {
    // A torn trailing line is skipped on reopen.
    std::ofstream(dir / "records.jsonl", std::ios::app) << "{\"id\":\"trunc";
    RecordStore store(dir.path());
    CHECK(store.size() == 2);
    CHECK(store.skipped_lines() == 1);
    CHECK(store.find(repo)[1].id == first_id);
    auto c = store.publish(repo, kDoc + "  ", Provenance::Authored);
    CHECK(c.record.submitted_at > store.find(repo)[1].submitted_at);
    CHECK(store.find(repo)[0] == c.record);
  }
}

TEST_CASE("record store: concurrent duplicates produce one record") {
  TempDir dir;
  RecordStore store(dir.path());
  auto repo = RepoKey::normalize("https://example.com/a");
  std::atomic<int> created{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&] {
      if (store.publish(repo, kDoc, Provenance::Authored).created) ++created;
      (void)store.find(repo);
    });
  }
  for (auto &t : threads) t.join();
  CHECK(created == 1);
  CHECK(store.size() == 1);
}

TEST_CASE("HTTP round trip") {
  TempDir dir;
  auto repo = RepoKey::normalize("https://example.com/lab/analysis");
  std::string id;
  {
    LibraryServer server(dir.path());
    auto endpoint = endpoint_of(server.start("127.0.0.1", 0));
    CHECK(fetch(endpoint, repo).empty());

    auto record = publish(endpoint, repo, kDoc, Provenance::Authored);
    id = record.id;
    CHECK(record.document == kDoc);
    CHECK(record.provenance == Provenance::Authored);
    CHECK(publish(endpoint, repo, kDoc, Provenance::Authored).id == id);

    auto derived = publish(endpoint, repo, kDoc + "\n", Provenance::HeuristicDerived);
    CHECK(derived.provenance == Provenance::HeuristicDerived);

    auto fetched = fetch(endpoint, RepoKey::normalize("HTTPS://EXAMPLE.com/lab/analysis.git"));
    REQUIRE(fetched.size() == 2);
    CHECK(fetched[0] == derived);
    CHECK(fetched[1].document == kDoc);
    server.stop();
  }
  {
    LibraryServer server(dir.path());
    auto endpoint = endpoint_of(server.start("127.0.0.1", 0));
    auto fetched = fetch(endpoint, repo);
    REQUIRE(fetched.size() == 2);
    CHECK(fetched[1].id == id);
    CHECK(fetched[1].document == kDoc);
  }
}

TEST_CASE("HTTP: the gate refuses documents without processes") {
  TempDir dir;
  LibraryServer server(dir.path());
  int port = server.start("127.0.0.1", 0);
  auto endpoint = endpoint_of(port);
  auto repo = RepoKey::normalize("https://example.com/a");

  const std::string empty = R"(<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"/>)";
  CHECK_THROWS_AS(publish(endpoint, repo, empty, Provenance::Authored), DocumentRejected);
  CHECK_THROWS_AS(publish(endpoint, repo, "<rdf:RDF", Provenance::Authored), DocumentRejected);
  // Rejected before the network: an unreachable endpoint still reports the rejection.
  CHECK_THROWS_AS(publish("http://127.0.0.1:1", repo, empty, Provenance::Authored), DocumentRejected);

  // The server applies the same gate to raw requests.
  httplib::Client client("127.0.0.1", port);
  nlohmann::json body = {{"repo", repo.str()}, {"document", empty}, {"provenance", "authored"}};
  auto response = client.Post("/v1/descriptions", body.dump(), "application/json");
  REQUIRE(response);
  CHECK(response->status == 400);
  auto bad_json = client.Post("/v1/descriptions", "{", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);
  body = {{"repo", repo.str()}, {"document", kDoc}, {"provenance", "guessed"}};
  auto bad_provenance = client.Post("/v1/descriptions", body.dump(), "application/json");
  REQUIRE(bad_provenance);
  CHECK(bad_provenance->status == 400);
  auto no_repo = client.Get("/v1/descriptions");
  REQUIRE(no_repo);
  CHECK(no_repo->status == 400);
  auto health = client.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(server.store().size() == 0);
}

TEST_CASE("HTTP: concurrent duplicate posts give one record") {
  TempDir dir;
  LibraryServer server(dir.path());
  auto endpoint = endpoint_of(server.start("127.0.0.1", 0));
  auto repo = RepoKey::normalize("https://example.com/a");
  std::vector<std::string> ids(8);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    threads.emplace_back([&, i] { ids[i] = publish(endpoint, repo, kDoc, Provenance::Authored).id; });
  }
  for (auto &t : threads) t.join();
  CHECK(std::all_of(ids.begin(), ids.end(), [&](const std::string &id) { return id == ids[0]; }));
  CHECK(server.store().size() == 1);
}

TEST_CASE("transport failures are LibraryErrors with status 0") {
  try {
    fetch("http://127.0.0.1:1", RepoKey::normalize("https://example.com/a"));
    FAIL("expected a LibraryError");
  } catch (const LibraryError &e) {
    CHECK(e.status() == 0);
    CHECK(e.endpoint() == "http://127.0.0.1:1");
  }
}
