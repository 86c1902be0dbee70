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

#include "vizrec/service.hpp"

#include <mutex>

#include "httplib.h"
#include "vizrec/error.hpp"
#include "vizrec/pmf.hpp"
#include "vizrec/recommender.hpp"

namespace vizrec {

HttpReply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

nlohmann::json handle_json(const Dataset& ds) {
  return {{"id", ds.id},
          {"name", ds.name},
          {"n", ds.table.row_count()},
          {"schema", ds.schema},
          {"columns", ds.table.column_names()},
          {"config", to_json(ds.config)},
          {"query_class", to_json(ds.query_class)},
          {"vc_dimension", ds.vc_dimension},
          {"gamma_min", ds.gamma_min},
          {"declared_m", ds.declared_m},
          {"preprocess", to_json(ds.report)},
          {"requests_served", ds.requests.load()}};
}

namespace {

nlohmann::json schema_summary(const Table& table) {
  auto cols = nlohmann::json::array();
  for (std::size_t i = 0; i < table.column_count(); ++i) {
    const auto& col = table.column(i);
    const auto st = column_stats(table, col.name);
    cols.push_back({{"name", col.name}, {"kind", std::string(to_string(col.kind))},
                    {"distinct", st.distinct}, {"nulls", st.nulls}});
  }
  return cols;
}

// Maps library errors onto status codes shared by every endpoint.
template <typename Fn>
HttpReply guarded(Fn fn) {
  try {
    return fn();
  } catch (const OutsideQueryClass& e) {
    return error_reply(422, "outside_query_class", e.what());
  } catch (const EmptySupport& e) {
    return error_reply(422, "empty_support",
                       std::string(e.what()) + "; zero-support visualizations are excluded from the hypothesis space");
  } catch (const UnknownFeature& e) {
    return error_reply(422, "unknown_feature", e.what());
  } catch (const Unsatisfiable& e) {
    return error_reply(422, "unsatisfiable", e.what());
  } catch (const CsvError& e) {
    return error_reply(400, "malformed_csv", e.what());
  } catch (const SchemaError& e) {
    return error_reply(400, "malformed_schema", e.what());
  } catch (const InvalidArgument& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const Error& e) {
    return error_reply(400, "bad_request", e.what());
  }
}

nlohmann::json parse_body(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("request body is not valid JSON");
  if (!j.is_object()) throw InvalidArgument("request body must be a JSON object");
  return j;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

HttpReply Service::health() const { return {200, {{"status", "ok"}}}; }

HttpReply Service::register_dataset(const std::string& body) {
  if (body.size() > options_.max_upload_bytes)
    return error_reply(413, "payload_too_large",
                       "upload exceeds " + std::to_string(options_.max_upload_bytes) + " bytes");
  return guarded([&]() -> HttpReply {
    const auto j = parse_body(body);
    if (!j.contains("csv") || !j["csv"].is_string()) throw InvalidArgument("field 'csv' (string) is required");
    LoadOptions load;
    load.name = j.value("name", std::string("dataset"));
    if (j.contains("schema")) load.kinds = parse_schema_overrides(j["schema"]);
    const auto csv = j["csv"].get<std::string>();
    const auto table = load_table(std::string_view(csv), load);
    auto config = j.contains("config") ? exploration_config_from_json(j["config"]) : ExplorationConfig{};
    config.threads = options_.threads;

    auto ds = std::make_shared<Dataset>();
    ds->name = load.name;
    ds->schema = schema_summary(table);
    auto reduced = preprocess(table, config);
    ds->table = std::move(reduced.table);
    ds->report = std::move(reduced.report);
    ds->query_class = query_class(ds->table, config);
    // Freeze d so later requests cannot change it.
    ds->vc_dimension = effective_vc_dimension(ds->table, config);
    config.vc_dimension = ds->vc_dimension;
    ds->config = config;
    if (ds->table.row_count() == 0) throw InvalidArgument("dataset has no rows");
    ds->gamma_min =
        min_selectivity_threshold(ds->vc_dimension, config.delta, ds->table.row_count(), config.c, config.log_base);
    ds->declared_m = raw_predicate_count(ds->table, config);
    {
      std::unique_lock lock(mutex_);
      ds->id = "ds-" + std::to_string(next_id_++);
      datasets_[ds->id] = ds;
    }
    return {201, handle_json(*ds)};
  });
}

HttpReply Service::list_datasets() const {
  std::shared_lock lock(mutex_);
  auto arr = nlohmann::json::array();
  for (const auto& [id, ds] : datasets_)
    arr.push_back({{"id", id},
                   {"name", ds->name},
                   {"n", ds->table.row_count()},
                   {"vc_dimension", ds->vc_dimension},
                   {"gamma_min", ds->gamma_min},
                   {"declared_m", ds->declared_m},
                   {"query_class", to_json(ds->query_class)},
                   {"requests_served", ds->requests.load()}});
  return {200, {{"datasets", arr}}};
}

std::shared_ptr<const Dataset> Service::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = datasets_.find(id);
  return it == datasets_.end() ? nullptr : it->second;
}

HttpReply Service::recommend(const std::string& id, const std::string& body) {
  const auto ds = find(id);
  if (!ds) return error_reply(404, "not_found", "unknown dataset '" + id + "'");
  return guarded([&]() -> HttpReply {
    const auto j = parse_body(body);
    if (!j.contains("group_by") || !j["group_by"].is_string()) throw InvalidArgument("field 'group_by' is required");
    const nlohmann::json pj = j.contains("reference") ? j["reference"] : j.value("predicate", nlohmann::json(true));
    Visualization reference{predicate_from_json(pj, &ds->table), j["group_by"].get<std::string>(),
                            j.value("buckets", ds->config.buckets)};
    if (!ds->table.has_column(reference.group_by)) throw UnknownFeature(reference.group_by);
    check_in_class(reference.predicate, ds->query_class);

    // Only the error level and the safety margin are per request; the class
    // and d stay as registered.
    auto config = ds->config;
    if (j.contains("delta")) config.delta = j["delta"].get<double>();
    if (j.contains("eps_v")) {
      if (j["eps_v"].is_null())
        config.eps_v.reset();
      else
        config.eps_v = j["eps_v"].get<double>();
    }
    if (j.contains("one_sample")) config.one_sample = j["one_sample"].get<bool>();
    for (const char* frozen : {"operators", "max_features", "vc_dimension", "c", "log_base"})
      if (j.contains(frozen))
        throw OutsideQueryClass(std::string("'") + frozen + "' is fixed at registration and cannot be changed");

    const auto result = vizrec(reference, ds->table, config);
    ds->requests.fetch_add(1);
    return {200, to_json(result)};
  });
}

HttpReply Service::pmf(const std::string& id, const std::map<std::string, std::string>& query) {
  const auto ds = find(id);
  if (!ds) return error_reply(404, "not_found", "unknown dataset '" + id + "'");
  return guarded([&]() -> HttpReply {
    auto gb = query.find("group_by");
    if (gb == query.end()) throw InvalidArgument("query parameter 'group_by' is required");
    Predicate pred;
    if (auto p = query.find("predicate"); p != query.end() && !p->second.empty()) {
      auto pj = nlohmann::json::parse(p->second, nullptr, false);
      if (pj.is_discarded()) throw InvalidArgument("predicate is not valid JSON");
      pred = predicate_from_json(pj, &ds->table);
    }
    std::size_t buckets = ds->config.buckets;
    if (auto b = query.find("buckets"); b != query.end()) {
      const auto v = parse_number(b->second);
      if (!v || *v < 2 || *v != static_cast<double>(static_cast<std::size_t>(*v)))
        throw InvalidArgument("buckets must be an integer >= 2");
      buckets = static_cast<std::size_t>(*v);
    }
    Visualization vis{pred, gb->second, buckets};
    if (!ds->table.has_column(vis.group_by)) throw UnknownFeature(vis.group_by);
    check_in_class(vis.predicate, ds->query_class);
    const auto p = estimate_pmf(vis, ds->table);
    const BoundConfig bounds{ds->config.delta, ds->config.c, ds->config.log_base, ds->vc_dimension};
    const auto eps = epsilon_bar(bounds, p.support);
    const auto n = ds->table.row_count();
    const double floor = ds->gamma_min * static_cast<double>(n);
    return {200,
            {{"visualization", to_json(vis)},
             {"pmf", to_json(p)},
             {"support", p.support},
             {"selectivity", static_cast<double>(p.support) / static_cast<double>(n)},
             {"eps_bar", to_json(eps)},
             {"gamma_min", ds->gamma_min},
             {"cannot_be_safe", static_cast<double>(p.support) <= floor}}};
  });
}

void Service::mount(httplib::Server& server) {
  const auto origin = options_.cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.set_payload_max_length(options_.max_upload_bytes + (1u << 20));

  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };

  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  server.Get("/datasets", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, list_datasets());
  });
  server.Post("/datasets", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, register_dataset(req.body));
  });
  server.Post(R"(/datasets/([^/]+)/recommend)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, recommend(req.matches[1], req.body));
  });
  server.Get(R"(/datasets/([^/]+)/pmf)", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    send(res, pmf(req.matches[1], query));
  });
  // Fills bodies for transport-level failures (unknown route, oversized body).
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto reply = res.status == 413 ? error_reply(413, "payload_too_large", "request body too large")
                       : res.status == 404 ? error_reply(404, "not_found", "no such endpoint")
                                           : error_reply(res.status, "http_error", "request failed");
    res.set_content(reply.body.dump(), "application/json");
  });
}

bool Service::serve(const std::string& host, int port) {
  httplib::Server server;
  mount(server);
  return server.listen(host, port);
}

}  // namespace vizrec
