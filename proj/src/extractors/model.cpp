#include "odke/extractors/model.hpp"

#include <atomic>
#include <fstream>

#include <httplib.h>

#include "odke/text.hpp"

namespace odke {

void MockModelClient::add(Script s) {
  std::lock_guard lock(mutex_);
  scripts_.push_back(std::move(s));
}

std::vector<QaAnswer> MockModelClient::answer(const std::string& question,
                                              const std::string& context) {
  std::lock_guard lock(mutex_);
  if (down_) throw ModelUnavailable("mock model is down");
  std::vector<QaAnswer> out;
  for (const auto& s : scripts_) {
    if (s.question != question) continue;
    const auto pos = context.find(s.answer_text);
    if (pos == std::string::npos) continue;
    out.push_back({s.answer_text, pos, pos + s.answer_text.size(), s.score});
  }
  return out;
}

HttpModelClient::HttpModelClient(std::string host, int port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

std::vector<QaAnswer> HttpModelClient::answer(const std::string& question,
                                              const std::string& context) {
  httplib::Client cli(host_, port_);
  const auto secs = timeout_.count() / 1000;
  const auto usecs = (timeout_.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  const Json body = {{"question", question}, {"context", context}};
  auto res = cli.Post("/answer", body.dump(), "application/json");
  if (!res) throw ModelUnavailable("model endpoint: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ModelUnavailable("model endpoint returned status " + std::to_string(res->status));
  std::vector<QaAnswer> out;
  try {
    const auto j = Json::parse(res->body);
    for (const auto& a : j.at("answers"))
      out.push_back({a.at("text").get<std::string>(), a.at("start").get<std::size_t>(),
                     a.at("end").get<std::size_t>(), a.at("score").get<double>()});
  } catch (const Json::exception& e) {
    throw ModelUnavailable(std::string("malformed model response: ") + e.what());
  }
  return out;
}

struct MockQaServer::Impl {
  std::shared_ptr<ModelExtractorClient> backend;
  httplib::Server server;
  std::thread thread;
  std::atomic<long long> delay_ms{0};
};

MockQaServer::MockQaServer(std::shared_ptr<ModelExtractorClient> backend)
    : impl_(std::make_unique<Impl>()) {
  impl_->backend = std::move(backend);
  impl_->server.Post("/answer", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto d = impl_->delay_ms.load(); d > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(d));
    Json in;
    try {
      in = Json::parse(req.body);
    } catch (const Json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":{"code":"bad_request"}})", "application/json");
      return;
    }
    Json answers = Json::array();
    try {
      for (const auto& a : impl_->backend->answer(in.value("question", std::string()),
                                                  in.value("context", std::string())))
        answers.push_back({{"text", a.text}, {"start", a.start}, {"end", a.end}, {"score", a.score}});
    } catch (const ModelUnavailable&) {
      res.status = 503;
      res.set_content(R"({"error":{"code":"unavailable"}})", "application/json");
      return;
    }
    res.set_content(Json{{"answers", answers}}.dump(), "application/json");
  });
}

MockQaServer::~MockQaServer() { stop(); }

int MockQaServer::start(int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port("127.0.0.1");
  } else if (!impl_->server.bind_to_port("127.0.0.1", port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind mock QA server");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockQaServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockQaServer::set_delay(std::chrono::milliseconds delay) { impl_->delay_ms = delay.count(); }

void QuestionTemplates::add(QuestionTemplate t) {
  if (t.text.find("{subject}") == std::string::npos)
    throw ValidationError("question template for " + t.predicate + " lacks {subject}");
  templates_.push_back(std::move(t));
}

const QuestionTemplate* QuestionTemplates::find(std::string_view predicate,
                                                std::string_view language) const {
  const QuestionTemplate* fallback = nullptr;
  for (const auto& t : templates_) {
    if (t.predicate != predicate) continue;
    if (t.language == language) return &t;
    if (t.language == "*" && !fallback) fallback = &t;
  }
  return fallback;
}

QuestionTemplates load_question_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open question templates " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.value("schema", "") != "odke.questions" || j.value("version", 0) != 1)
    throw ParseError(path.string() + ": expected schema odke.questions version 1");
  QuestionTemplates out;
  for (const auto& t : j.at("templates"))
    out.add({t.at("predicate").get<std::string>(), t.value("lang", std::string("en")),
             t.at("text").get<std::string>()});
  return out;
}

std::string format_question(const QuestionTemplate& t, std::string_view subject_name) {
  std::string q = t.text;
  for (auto pos = q.find("{subject}"); pos != std::string::npos; pos = q.find("{subject}", pos)) {
    q.replace(pos, 9, subject_name);
    pos += subject_name.size();
  }
  return q;
}

ModelExtraction model_extract(ModelExtractorClient& client, const QuestionTemplates& templates,
                              const Ontology& ontology, const ExtractionTask& task,
                              const std::vector<PassageRef>& passages, const ExtractContext& ctx) {
  const auto* tmpl = templates.find(task.predicate, task.language);
  if (!tmpl) throw ValidationError("no question template for predicate " + task.predicate);
  const auto& predicate = ontology.predicate(task.predicate);
  const auto question = format_question(*tmpl, task.subject_name);

  ValueExtractor constructor;
  switch (predicate.value_kind) {
    case ValueKind::quantity: constructor.kind = ValueConstructor::quantity; break;
    case ValueKind::date: constructor.kind = ValueConstructor::date; break;
    case ValueKind::money: constructor.kind = ValueConstructor::money; break;
    case ValueKind::external_id: constructor.kind = ValueConstructor::external_id; break;
    case ValueKind::entity_ref: constructor.kind = ValueConstructor::entity_mention; break;
    case ValueKind::string: constructor.kind = ValueConstructor::text; break;
  }

  ModelExtraction out;
  for (const auto& ref : passages) {
    if (!ref.document || !ref.passage) continue;
    std::vector<QaAnswer> answers;
    try {
      answers = client.answer(question, ref.passage->text);
    } catch (const ModelUnavailable& e) {
      out.candidates.clear();
      out.deferred = true;
      out.error = e.what();
      return out;
    }
    const auto& locale = ctx.locales ? ctx.locales->get(ref.document->language)
                                     : LocaleTable::builtin(ref.document->language);
    for (const auto& a : answers) {
      const auto& text = ref.passage->text;
      if (a.start > a.end || a.end > text.size() ||
          text.compare(a.start, a.end - a.start, a.text) != 0 || a.text.empty())
        continue;
      CandidateFact c;
      c.subject = task.subject;
      c.predicate = task.predicate;
      c.raw_text = a.text;
      c.raw_span.source_url = ref.document->url;
      c.raw_span.revision_id = ref.document->revision_id;
      c.raw_span.span = PassageSpan{ref.passage->id, a.start, a.end};
      c.raw_span.extractor_id = "model:" + client.id();
      c.raw_span.extracted_at = ctx.now;
      c.raw_span.pipeline_run_id = ctx.run_id;
      c.extractor_id = c.raw_span.extractor_id;
      c.extractor_score = std::clamp(a.score, 0.0, 1.0);
      c.language = ref.document->language;
      c.value = construct_value(constructor, a.text, locale, ref.document->language);
      c.needs_resolution = predicate.value_kind == ValueKind::entity_ref;
      out.candidates.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace odke
