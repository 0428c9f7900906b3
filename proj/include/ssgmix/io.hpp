#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssgmix/model.hpp"

namespace ssgmix {

// Malformed input files; the CLI maps this to exit code 2.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    Matrix data;
    std::vector<std::string> header;  // empty when the file had none
    bool had_header = false;
};

// Comma-separated numeric matrix with '.' decimals. A single header row is
// auto-detected: if any field of the first line fails to parse as a number the
// line is treated as column names. Ragged or non-numeric rows raise
// parse_error naming the offending 1-based line.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);

void write_matrix_csv(const std::string& path, const Matrix& data,
                      const std::vector<std::string>& header);
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
void write_trace_csv(const std::string& path, const std::vector<double>& trace);

struct ModelMeta {
    std::uint64_t seed = 0;
    std::optional<double> loglik;
    std::optional<double> bic;
    std::string config;  // echo of the fitting configuration, free-form
};

// Model JSON schema:
//   { "k", "d", "weights": [...],
//     "components": [ {"alpha", "mu": [...], "lambda": [...], "sigma": [[...]]} ],
//     "meta": { "seed", "loglik", "bic", "config", "version" } }
// Serialization is canonical (sorted keys, shortest round-trip doubles), so
// write -> read -> write is byte-identical.
std::string model_to_json(const MixtureModel& model, const ModelMeta& meta);
MixtureModel model_from_json(const std::string& text, ModelMeta* meta = nullptr);
void write_model_json(const std::string& path, const MixtureModel& model, const ModelMeta& meta);
MixtureModel read_model_json(const std::string& path, ModelMeta* meta = nullptr);

// FNV-1a content digest used in run manifests.
std::string file_digest(const std::string& path);

struct RunManifest {
    std::string command;
    std::string config;
    std::uint64_t seed = 0;
    std::string input_digest;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;
};

// Written next to the first output as <first-output>.manifest.json.
void write_manifest(const RunManifest& m);

std::string slurp_file(const std::string& path);

}  // namespace ssgmix
