#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "odke/extractors/extract.hpp"
#include "odke/initiator/initiator.hpp"

namespace odke {

struct QaAnswer {
  std::string text;
  std::size_t start = 0;  // byte offsets into the context
  std::size_t end = 0;
  double score = 0;
};

class ModelUnavailable : public Error {
 public:
  using Error::Error;
};

// Question answering over one passage. Request body for the HTTP flavour:
// {"question": str, "context": str}; response {"answers":[{"text","start","end","score"}]}.
class ModelExtractorClient {
 public:
  virtual ~ModelExtractorClient() = default;
  virtual std::string id() const = 0;
  // Throws ModelUnavailable on timeout or connection failure.
  virtual std::vector<QaAnswer> answer(const std::string& question, const std::string& context) = 0;
};

// Scripted answers: an answer is returned for a question when its text occurs in
// the context; offsets are those of the first occurrence.
class MockModelClient : public ModelExtractorClient {
 public:
  struct Script {
    std::string question;
    std::string answer_text;
    double score = 0.9;
  };

  explicit MockModelClient(std::vector<Script> scripts = {}) : scripts_(std::move(scripts)) {}
  void add(Script s);
  void set_down(bool down) { down_ = down; }

  std::string id() const override { return "mock"; }
  std::vector<QaAnswer> answer(const std::string& question, const std::string& context) override;

 private:
  std::vector<Script> scripts_;
  bool down_ = false;
  mutable std::mutex mutex_;
};

class HttpModelClient : public ModelExtractorClient {
 public:
  HttpModelClient(std::string host, int port, std::chrono::milliseconds timeout);
  std::string id() const override { return "http"; }
  std::vector<QaAnswer> answer(const std::string& question, const std::string& context) override;

 private:
  std::string host_;
  int port_;
  std::chrono::milliseconds timeout_;
};

// POST /answer backed by another client; for tests and local runs.
class MockQaServer {
 public:
  explicit MockQaServer(std::shared_ptr<ModelExtractorClient> backend);
  ~MockQaServer();
  // Binds 127.0.0.1 on `port` (0 = any free port) and serves in a background thread.
  int start(int port = 0);
  void stop();
  void set_delay(std::chrono::milliseconds delay);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct QuestionTemplate {
  std::string predicate;
  std::string language;
  std::string text;  // contains "{subject}"
};

class QuestionTemplates {
 public:
  void add(QuestionTemplate t);
  const QuestionTemplate* find(std::string_view predicate, std::string_view language) const;
  bool empty() const noexcept { return templates_.empty(); }

 private:
  std::vector<QuestionTemplate> templates_;
};

// {"schema":"odke.questions","version":1,"templates":[{"predicate","lang","text"}]}
QuestionTemplates load_question_templates(const std::filesystem::path& path);

std::string format_question(const QuestionTemplate& t, std::string_view subject_name);

struct ModelExtraction {
  std::vector<CandidateFact> candidates;
  bool deferred = false;
  std::string error;
};

struct PassageRef {
  const Document* document = nullptr;
  const Passage* passage = nullptr;
};

// One question per task; asks the client once per passage. Answers whose text
// does not match the context at the reported offsets are discarded.
// Throws ValidationError when no template exists for the task's predicate.
ModelExtraction model_extract(ModelExtractorClient& client, const QuestionTemplates& templates,
                              const Ontology& ontology, const ExtractionTask& task,
                              const std::vector<PassageRef>& passages, const ExtractContext& ctx);

}  // namespace odke
