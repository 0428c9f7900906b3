#include "ssgmix/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ssgmix/version.hpp"

namespace ssgmix {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        std::string field = line.substr(start, pos == std::string::npos ? pos : pos - start);
        // trim surrounding spaces and a trailing CR
        while (!field.empty() && (field.back() == ' ' || field.back() == '\r' || field.back() == '\t'))
            field.pop_back();
        std::size_t lead = 0;
        while (lead < field.size() && (field[lead] == ' ' || field[lead] == '\t')) ++lead;
        out.push_back(field.substr(lead));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::size_t ncols = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t j = 0; j < fields.size(); ++j)
            numeric &= parse_double(fields[j], row[j]);
        if (!numeric) {
            if (rows.empty() && !table.had_header) {
                table.header.assign(fields.begin(), fields.end());
                table.had_header = true;
                ncols = fields.size();
                continue;
            }
            throw parse_error(origin + ": line " + std::to_string(lineno) +
                              ": non-numeric field");
        }
        if (ncols == 0) ncols = fields.size();
        if (fields.size() != ncols)
            throw parse_error(origin + ": line " + std::to_string(lineno) + ": expected " +
                              std::to_string(ncols) + " fields, got " +
                              std::to_string(fields.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error(origin + ": no data rows");
    table.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < ncols; ++j)
            table.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(slurp_file(path), path); }

namespace {

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write file: " + path);
    out << text;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& data,
                      const std::vector<std::string>& header) {
    std::ostringstream ss;
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j)
            ss << (j ? "," : "") << header[j];
        ss << "\n";
    }
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j)
            ss << (j ? "," : "") << format_double(data(i, j));
        ss << "\n";
    }
    write_text(path, ss.str());
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    std::ostringstream ss;
    ss << "row_index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) ss << i << "," << labels[i] << "\n";
    write_text(path, ss.str());
}

void write_trace_csv(const std::string& path, const std::vector<double>& trace) {
    std::ostringstream ss;
    ss << "iteration,loglik\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        ss << (i + 1) << "," << format_double(trace[i]) << "\n";
    write_text(path, ss.str());
}

std::string model_to_json(const MixtureModel& model, const ModelMeta& meta) {
    model.validate();
    json j;
    j["k"] = model.k();
    j["d"] = model.dim();
    j["weights"] = std::vector<double>(model.weights.data(),
                                       model.weights.data() + model.weights.size());
    json comps = json::array();
    for (const auto& c : model.components) {
        json jc;
        jc["alpha"] = c.alpha;
        jc["mu"] = std::vector<double>(c.mu.data(), c.mu.data() + c.mu.size());
        jc["lambda"] = std::vector<double>(c.lambda.data(), c.lambda.data() + c.lambda.size());
        std::vector<std::vector<double>> sigma(static_cast<std::size_t>(c.sigma.rows()));
        for (Eigen::Index r = 0; r < c.sigma.rows(); ++r)
            sigma[static_cast<std::size_t>(r)] =
                std::vector<double>(c.sigma.row(r).begin(), c.sigma.row(r).end());
        jc["sigma"] = sigma;
        comps.push_back(jc);
    }
    j["components"] = comps;
    json jm;
    jm["seed"] = meta.seed;
    jm["version"] = kVersion;
    if (meta.loglik) jm["loglik"] = *meta.loglik;
    if (meta.bic) jm["bic"] = *meta.bic;
    if (!meta.config.empty()) jm["config"] = meta.config;
    j["meta"] = jm;
    return j.dump(2) + "\n";
}

MixtureModel model_from_json(const std::string& text, ModelMeta* meta) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("model JSON: ") + e.what());
    }
    try {
        MixtureModel model;
        const int k = j.at("k").get<int>();
        const int d = j.at("d").get<int>();
        const auto w = j.at("weights").get<std::vector<double>>();
        if (static_cast<int>(w.size()) != k) throw parse_error("model JSON: weight count != k");
        model.weights = Eigen::Map<const Vector>(w.data(), k);
        for (const auto& jc : j.at("components")) {
            ComponentParams c;
            c.alpha = jc.at("alpha").get<double>();
            const auto mu = jc.at("mu").get<std::vector<double>>();
            const auto lambda = jc.at("lambda").get<std::vector<double>>();
            const auto sigma = jc.at("sigma").get<std::vector<std::vector<double>>>();
            if (static_cast<int>(mu.size()) != d || static_cast<int>(lambda.size()) != d ||
                static_cast<int>(sigma.size()) != d)
                throw parse_error("model JSON: component dimension mismatch");
            c.mu = Eigen::Map<const Vector>(mu.data(), d);
            c.lambda = Eigen::Map<const Vector>(lambda.data(), d);
            c.sigma.resize(d, d);
            for (int r = 0; r < d; ++r) {
                if (static_cast<int>(sigma[static_cast<std::size_t>(r)].size()) != d)
                    throw parse_error("model JSON: sigma is not d x d");
                for (int col = 0; col < d; ++col)
                    c.sigma(r, col) = sigma[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
            }
            model.components.push_back(std::move(c));
        }
        if (model.k() != k) throw parse_error("model JSON: component count != k");
        if (meta && j.contains("meta")) {
            const auto& jm = j.at("meta");
            if (jm.contains("seed")) meta->seed = jm.at("seed").get<std::uint64_t>();
            if (jm.contains("loglik")) meta->loglik = jm.at("loglik").get<double>();
            if (jm.contains("bic")) meta->bic = jm.at("bic").get<double>();
            if (jm.contains("config")) meta->config = jm.at("config").get<std::string>();
        }
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw parse_error(std::string("model JSON: ") + e.what());
    }
}

void write_model_json(const std::string& path, const MixtureModel& model, const ModelMeta& meta) {
    write_text(path, model_to_json(model, meta));
}

MixtureModel read_model_json(const std::string& path, ModelMeta* meta) {
    return model_from_json(slurp_file(path), meta);
}

std::string file_digest(const std::string& path) {
    const std::string bytes = slurp_file(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

void write_manifest(const RunManifest& m) {
    if (m.outputs.empty()) return;
    json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["input_digest"] = m.input_digest;
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    j["version"] = kVersion;
    write_text(m.outputs.front() + ".manifest.json", j.dump(2) + "\n");
}

}  // namespace ssgmix
