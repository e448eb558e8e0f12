#include <atomic>
#include <thread>

#include <httplib.h>

#include "odke/curation/curation.hpp"

namespace odke {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message, Json extra = Json::object()) {
  Json body = {{"error", {{"code", code}, {"message", message}}}};
  for (auto& [k, v] : extra.items()) body[k] = v;
  send_json(res, status, body);
}

Json task_summary(const CurationTask& t) {
  Json j = {{"task_id", t.task_id},
            {"subject", {{"id", t.subject.id.str()}, {"name", t.subject.name}}},
            {"predicate", t.predicate},
            {"status", to_string(t.status)},
            {"created_at", format_timestamp(t.created_at)},
            {"options", t.clusters.size()},
            {"top_score", t.clusters.empty() ? 0.0 : t.clusters.front().score}};
  if (t.decision) j["verdict"] = to_string(t.decision->verdict);
  return j;
}

std::optional<std::size_t> positive(const httplib::Request& req, const char* name,
                                    std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const auto s = req.get_param_value(name);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9)
    return std::nullopt;
  const auto v = std::stoul(s);
  if (v == 0) return std::nullopt;
  return v;
}

}  // namespace

struct CurationServer::Impl {
  TaskStore& store;
  const Clock& clock;
  httplib::Server server;
  std::thread thread;

  Impl(TaskStore& s, const Clock& c) : store(s), clock(c) {
    // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
  }
};

CurationServer::CurationServer(TaskStore& store, const Clock& clock,
                               std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store, clock)) {
  auto& srv = impl_->server;
  Impl* self = impl_.get();

  srv.Get("/tasks", [self](const httplib::Request& req, httplib::Response& res) {
    std::optional<TaskStatus> status;
    if (req.has_param("status")) {
      try {
        status = task_status_from_string(req.get_param_value("status"));
      } catch (const ValidationError& e) {
        return send_error(res, 400, "invalid_status", e.what());
      }
    }
    const auto page = positive(req, "page", 1);
    const auto page_size = positive(req, "page_size", 20);
    if (!page || !page_size || *page_size > 500)
      return send_error(res, 400, "invalid_page", "page and page_size must be positive integers");
    std::size_t total = 0;
    Json tasks = Json::array();
    for (const auto& t : self->store.page(status, *page, *page_size, &total))
      tasks.push_back(task_summary(t));
    send_json(res, 200,
              {{"tasks", tasks},
               {"page", *page},
               {"page_size", *page_size},
               {"total", total},
               {"pages", (total + *page_size - 1) / *page_size}});
  });

  srv.Get(R"(/tasks/([^/]+))", [self](const httplib::Request& req, httplib::Response& res) {
    const auto task = self->store.get(req.matches[1].str());
    if (!task) return send_error(res, 404, "not_found", "no such task");
    send_json(res, 200, to_json(*task));
  });

  srv.Post(R"(/tasks/([^/]+)/decision)", [self](const httplib::Request& req,
                                               httplib::Response& res) {
    const auto curator = req.get_header_value("X-Curator-Id");
    if (curator.empty())
      return send_error(res, 400, "missing_curator", "X-Curator-Id header is required");
    Decision d;
    d.task_id = req.matches[1].str();
    d.curator_id = curator;
    d.decided_at = self->clock.now();
    try {
      const auto body = Json::parse(req.body);
      d.verdict = verdict_from_string(body.at("verdict").get<std::string>());
      if (d.verdict == Verdict::accept) d.cluster_id = body.at("cluster_id").get<std::string>();
      if (d.verdict == Verdict::amend) d.amended = value_from_json(body.at("value"));
    } catch (const std::exception& e) {
      return send_error(res, 400, "invalid_decision", e.what());
    }
    const auto r = self->store.decide(std::move(d));
    switch (r.outcome) {
      case DecideOutcome::ok:
        return send_json(res, 200, to_json(*self->store.get(req.matches[1].str())));
      case DecideOutcome::not_found:
        return send_error(res, 404, "not_found", r.message);
      case DecideOutcome::conflict:
        return send_error(res, 409, "conflict", r.message,
                          {{"decision", to_json(*r.winner)}});
      case DecideOutcome::invalid:
        return send_error(res, 400, "invalid_decision", r.message);
    }
  });

  srv.Get("/stats", [self](const httplib::Request&, httplib::Response& res) {
    const auto s = self->store.stats();
    send_json(res, 200,
              {{"pending", s.pending},
               {"decided", s.decided},
               {"total", s.pending + s.decided},
               {"verdicts", s.verdicts}});
  });

  if (static_dir) srv.set_mount_point("/", static_dir->string());

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal", what);
  });
}

CurationServer::~CurationServer() { stop(); }

int CurationServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) bound = impl_->server.bind_to_any_port(host);
  else if (!impl_->server.bind_to_port(host, port)) bound = -1;
  if (bound < 0) throw Error("cannot bind curation server to " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void CurationServer::listen(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port))
    throw Error("cannot bind curation server to " + host + ":" + std::to_string(port));
  impl_->server.listen_after_bind();
}

void CurationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace odke
