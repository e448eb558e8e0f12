#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odke/corroborator/corroborate.hpp"
#include "odke/initiator/initiator.hpp"

namespace odke {

enum class PipelineMode { batch, stream };

struct ModelEndpoint {
  std::string host = "127.0.0.1";
  int port = 0;
  std::chrono::milliseconds timeout{2000};
};

// Paths are resolved against the config file's directory.
struct PipelineConfig {
  std::filesystem::path ontology;
  std::filesystem::path entities;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> feed;
  std::vector<std::filesystem::path> rules;
  std::optional<std::filesystem::path> link_rules;
  std::optional<std::filesystem::path> query_templates;
  std::optional<std::filesystem::path> question_templates;
  std::optional<std::filesystem::path> locales;
  std::optional<std::filesystem::path> golden;
  std::optional<std::filesystem::path> escalations;
  std::filesystem::path work_dir = "work";

  PipelineMode mode = PipelineMode::batch;
  ScoringConfig scoring;
  double sla_minutes = 240;
  int poll_interval_minutes = 60;
  int processing_minutes = 5;
  std::size_t workers = 1;
  std::size_t search_k = 5;
  std::vector<std::string> languages{"en"};
  std::vector<Target> targets;
  std::vector<std::string> stream_predicates;  // empty: every predicate
  std::size_t queue_capacity = 1024;
  bool full_scan = true;
  double correction_min_confidence = 0.9;
  std::optional<Timestamp> now;  // fixed clock for reproducible runs
  std::optional<ModelEndpoint> model;

  std::filesystem::path log_path() const { return work_dir / "facts.log"; }
  std::filesystem::path entity_journal_path() const { return work_dir / "entities.journal"; }
  std::filesystem::path curation_journal_path() const { return work_dir / "curation.journal"; }
  std::filesystem::path view_path() const { return work_dir / "view.ndjson"; }
  std::filesystem::path metrics_path() const { return work_dir / "runs.ndjson"; }
  std::filesystem::path deliveries_path() const { return work_dir / "deliveries.ndjson"; }

  // Referenced files exist and thresholds are ordered. Throws ValidationError.
  void validate() const;
};

// {"schema":"odke.config","version":1, ...}; throws ValidationError / ParseError.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);
Json to_json(const PipelineConfig& c);

}  // namespace odke
