#include "execdesc/library.hpp"

#include <httplib.h>
#include <json.hpp>

#include "execdesc/vocab.hpp"

namespace execdesc::library {

namespace {

using nlohmann::json;

// Uploads are parsed against this base; relative IRIs only need to resolve,
// not to point anywhere.
const rdf::Iri kUploadBase{"urn:execdesc:upload"};

json to_json(const LibraryRecord &r) {
  return {{"id", r.id},
          {"repo", r.repo},
          {"document", r.document},
          {"content_hash", r.content_hash},
          {"provenance", to_string(r.provenance)},
          {"submitted_at", r.submitted_at}};
}

LibraryRecord record_from_json(const json &j) {
  LibraryRecord r;
  r.id = j.at("id").get<std::string>();
  r.repo = j.at("repo").get<std::string>();
  r.document = j.at("document").get<std::string>();
  r.content_hash = j.at("content_hash").get<std::string>();
  r.submitted_at = j.at("submitted_at").get<std::string>();
  auto provenance = parse_provenance(j.at("provenance").get<std::string>());
  if (!provenance) throw std::runtime_error("unknown provenance");
  r.provenance = *provenance;
  return r;
}

// Empty when the document is acceptable, else the reason.
std::string gate(const std::string &document) {
  try {
    auto description = load_description(document, kUploadBase);
    if (description.processes.empty()) return "document describes no processes";
  } catch (const rdf::ParseError &e) {
    return std::string("document is not valid RDF/XML: ") + e.what();
  }
  return {};
}

void reply(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

struct Endpoint {
  std::string origin;
  std::string prefix;
};

Endpoint split_endpoint(const std::string &endpoint) {
  auto sep = endpoint.find("://");
  auto slash = endpoint.find('/', sep == std::string::npos ? 0 : sep + 3);
  if (slash == std::string::npos) return {endpoint, ""};
  std::string prefix = endpoint.substr(slash);
  while (prefix.ends_with('/')) prefix.pop_back();
  return {endpoint.substr(0, slash), prefix};
}

std::unique_ptr<httplib::Client> connect(const std::string &endpoint, std::string &prefix) {
  auto parts = split_endpoint(endpoint);
  prefix = parts.prefix;
  auto client = std::make_unique<httplib::Client>(parts.origin);
  if (!client->is_valid()) throw LibraryError(endpoint, 0, "invalid endpoint URL");
  client->set_connection_timeout(5);
  client->set_read_timeout(30);
  client->set_write_timeout(30);
  return client;
}

std::string server_message(const httplib::Result &result) {
  try {
    auto body = json::parse(result->body);
    if (body.contains("error")) return body["error"].get<std::string>();
  } catch (const json::exception &) {
  }
  return "HTTP " + std::to_string(result->status);
}

} // namespace

LibraryServer::LibraryServer(std::filesystem::path store_dir)
    : store_(std::move(store_dir)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

LibraryServer::~LibraryServer() { stop(); }

void LibraryServer::install_routes() {
  server_->Get("/v1/health", [](const httplib::Request &, httplib::Response &res) {
    reply(res, 200, {{"status", "ok"}});
  });

  server_->Get("/v1/descriptions", [this](const httplib::Request &req, httplib::Response &res) {
    if (!req.has_param("repo")) return reply(res, 400, {{"error", "missing repo parameter"}});
    auto records = store_.find(RepoKey::normalize(req.get_param_value("repo")));
    if (records.empty()) return reply(res, 404, {{"error", "no records for repository"}});
    json body = {{"records", json::array()}};
    for (const auto &r : records) body["records"].push_back(to_json(r));
    reply(res, 200, body);
  });

  server_->Post("/v1/descriptions", [this](const httplib::Request &req, httplib::Response &res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception &) {
      return reply(res, 400, {{"error", "request body is not JSON"}});
    }
    if (!body.is_object() || !body.contains("repo") || !body["repo"].is_string() ||
        !body.contains("document") || !body["document"].is_string()) {
      return reply(res, 400, {{"error", "repo and document are required strings"}});
    }
    auto provenance = Provenance::Authored;
    if (body.contains("provenance")) {
      auto parsed = body["provenance"].is_string()
                        ? parse_provenance(body["provenance"].get<std::string>())
                        : std::nullopt;
      if (!parsed) return reply(res, 400, {{"error", "provenance must be authored or heuristic-derived"}});
      provenance = *parsed;
    }
    auto repo = RepoKey::normalize(body["repo"].get<std::string>());
    if (repo.str().empty()) return reply(res, 400, {{"error", "repo is empty"}});
    auto document = body["document"].get<std::string>();
    if (auto reason = gate(document); !reason.empty()) return reply(res, 400, {{"error", reason}});

    try {
      auto published = store_.publish(repo, document, provenance);
      reply(res, published.created ? 201 : 200, to_json(published.record));
    } catch (const std::exception &e) {
      reply(res, 500, {{"error", e.what()}});
    }
  });
}

int LibraryServer::start(const std::string &host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void LibraryServer::run(const std::string &host, int port, const std::function<void(int)> &on_bound) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  if (on_bound) on_bound(bound);
  server_->listen_after_bind();
}

void LibraryServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::vector<LibraryRecord> fetch(const std::string &endpoint, const RepoKey &repo) {
  std::string prefix;
  auto client = connect(endpoint, prefix);
  auto result = client->Get(prefix + "/v1/descriptions", httplib::Params{{"repo", repo.str()}}, httplib::Headers{});
  if (!result) throw LibraryError(endpoint, 0, "request failed: " + httplib::to_string(result.error()));
  if (result->status == 404) return {};
  if (result->status != 200) throw LibraryError(endpoint, result->status, server_message(result));

  std::vector<LibraryRecord> records;
  try {
    auto body = json::parse(result->body);
    for (const auto &j : body.at("records")) records.push_back(record_from_json(j));
  } catch (const std::exception &e) {
    throw LibraryError(endpoint, result->status, std::string("malformed response: ") + e.what());
  }
  return records;
}

LibraryRecord publish(const std::string &endpoint, const RepoKey &repo, const std::string &document,
                      Provenance provenance) {
  if (auto reason = gate(document); !reason.empty()) throw DocumentRejected(endpoint, 0, reason);

  std::string prefix;
  auto client = connect(endpoint, prefix);
  json body = {{"repo", repo.str()}, {"document", document}, {"provenance", to_string(provenance)}};
  auto result = client->Post(prefix + "/v1/descriptions", body.dump(), "application/json");
  if (!result) throw LibraryError(endpoint, 0, "request failed: " + httplib::to_string(result.error()));
  if (result->status != 200 && result->status != 201) {
    throw LibraryError(endpoint, result->status, server_message(result));
  }
  try {
    return record_from_json(json::parse(result->body));
  } catch (const std::exception &e) {
    throw LibraryError(endpoint, result->status, std::string("malformed response: ") + e.what());
  }
}

} // namespace execdesc::library
