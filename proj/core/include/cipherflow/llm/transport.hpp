#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "cipherflow/error.hpp"

namespace cipherflow::llm {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{60000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Raised by transports when no HTTP status was obtained.
class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

// Real HTTP(S) POST. A new connection per call, so instances are safe to
// share across threads.
class HttpTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

// 64-bit FNV-1a of the request body, as 16 lowercase hex digits. Keys the
// fixture files.
std::string request_hash(std::string_view body);

// Replays recorded responses keyed by request_hash(body). File layout:
//   {"version": 1, "entries": [{"request_hash": "...", "status": 200,
//                               "body": "<raw response body>"}, ...]}
// Several entries with one hash replay in order, the last one repeating.
class FixtureTransport : public Transport {
 public:
  explicit FixtureTransport(const std::filesystem::path& file);
  FixtureTransport() = default;

  void add(const std::string& hash, HttpResponse response);
  HttpResponse post(const HttpRequest& request) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::vector<HttpResponse>> entries_;
  std::map<std::string, std::size_t> cursor_;
};

// Forwards to another transport and keeps every exchange for save().
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(Transport& inner) : inner_(inner) {}
  HttpResponse post(const HttpRequest& request) override;
  void save(const std::filesystem::path& file) const;

 private:
  Transport& inner_;
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, HttpResponse>> recorded_;
};

}  // namespace cipherflow::llm
