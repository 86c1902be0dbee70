/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

#include "json.hpp"
#include "vizrec/enumeration.hpp"
#include "vizrec/preprocess.hpp"
#include "vizrec/table.hpp"

namespace httplib {
class Server;
}

namespace vizrec {

struct ServiceOptions {
  std::size_t max_upload_bytes = 64u << 20;
  std::string cors_origin = "*";
  unsigned threads = 1;  // recommendation scoring threads per request
};

// A registered table. Everything is fixed at registration except the request
// counter.
struct Dataset {
  std::string id;
  std::string name;
  Table table;  // after preprocessing
  nlohmann::json schema;  // columns of the uploaded table
  ExplorationConfig config;
  QueryClassSpec query_class;
  int vc_dimension = 0;
  double gamma_min = 0.0;
  double declared_m = 0.0;  // raw predicate count of the declared class
  PreprocessReport report;
  mutable std::atomic<std::size_t> requests{0};
};

nlohmann::json handle_json(const Dataset& ds);

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

HttpReply error_reply(int status, const std::string& code, const std::string& message);

// Endpoint logic independent of the transport. Thread-safe: the registry
// takes a shared lock for reads and an exclusive one for registration.
class Service {
 public:
  explicit Service(ServiceOptions options = {});

  HttpReply health() const;
  HttpReply register_dataset(const std::string& body);
  HttpReply list_datasets() const;
  HttpReply recommend(const std::string& id, const std::string& body);
  HttpReply pmf(const std::string& id, const std::map<std::string, std::string>& query);

  std::shared_ptr<const Dataset> find(const std::string& id) const;
  const ServiceOptions& options() const { return options_; }

  // Routes, CORS headers and JSON error bodies on an httplib server.
  void mount(httplib::Server& server);
  // Blocks until the server stops.
  bool serve(const std::string& host, int port);

 private:
  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Dataset>> datasets_;
  std::size_t next_id_ = 1;
};

}  // namespace vizrec
