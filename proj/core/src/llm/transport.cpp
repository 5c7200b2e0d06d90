#include "cipherflow/llm/transport.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace cipherflow::llm {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("malformed endpoint URL: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

}  // namespace

HttpResponse HttpTransport::post(const HttpRequest& request) {
  const ParsedUrl url = split_url(request.url);
  httplib::Client client(url.origin);
  if (!client.is_valid()) throw TransportError("unsupported endpoint URL: " + request.url);

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  auto result = client.Post(url.path, headers, request.body, "application/json");
  if (!result) {
    const auto err = result.error();
    const std::string what = "POST " + request.url + ": " + httplib::to_string(err);
    // httplib reports an expired read timeout as a Read error.
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw TimeoutError(what);
    }
    throw TransportError(what);
  }
  return {result->status, result->body};
}

std::string request_hash(std::string_view body) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : body) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FixtureTransport::FixtureTransport(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw TransportError("cannot open fixture file " + file.string());
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("version").get<int>() != 1) {
      throw TransportError("unsupported fixture version in " + file.string());
    }
    for (const auto& e : j.at("entries")) {
      add(e.at("request_hash").get<std::string>(),
          {e.at("status").get<int>(), e.at("body").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError("malformed fixture file " + file.string() + ": " + e.what());
  }
}

void FixtureTransport::add(const std::string& hash, HttpResponse response) {
  std::lock_guard lock(mutex_);
  entries_[hash].push_back(std::move(response));
}

HttpResponse FixtureTransport::post(const HttpRequest& request) {
  const std::string hash = request_hash(request.body);
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(hash);
  if (it == entries_.end() || it->second.empty()) {
    throw TransportError("no fixture recorded for request " + hash);
  }
  std::size_t& pos = cursor_[hash];
  const HttpResponse& r = it->second[std::min(pos, it->second.size() - 1)];
  ++pos;
  return r;
}

HttpResponse RecordingTransport::post(const HttpRequest& request) {
  HttpResponse r = inner_.post(request);
  std::lock_guard lock(mutex_);
  recorded_.emplace_back(request_hash(request.body), r);
  return r;
}

void RecordingTransport::save(const std::filesystem::path& file) const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["entries"] = nlohmann::ordered_json::array();
  {
    std::lock_guard lock(mutex_);
    for (const auto& [hash, r] : recorded_) {
      j["entries"].push_back({{"request_hash", hash}, {"status", r.status}, {"body", r.body}});
    }
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw TransportError("cannot write fixture file " + file.string());
  out << j.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  if (!out) throw TransportError("failed writing fixture file " + file.string());
}

}  // namespace cipherflow::llm
