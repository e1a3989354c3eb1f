#include "ragopt/simrag.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ragopt/rng.hpp"

namespace ragopt {

namespace {

const LlmEntry& llm_entry(const ModelCatalog& catalog, const std::string& name) {
    const auto it = catalog.llms.find(name);
    if (it == catalog.llms.end()) throw std::invalid_argument("catalog has no LLM '" + name + "'");
    return it->second;
}

const EmbeddingEntry& embedding_entry(const ModelCatalog& catalog, const std::string& name) {
    const auto it = catalog.embeddings.find(name);
    if (it == catalog.embeddings.end())
        throw std::invalid_argument("catalog has no embedding model '" + name + "'");
    return it->second;
}

double temperature_penalty(const QualitySurface& s, double t) {
    double pen = 0.0;
    if (t > s.temp_knee) {
        const double d = t - s.temp_knee;
        pen += s.temp_quad * d * d;
    }
    if (t > 1.0) {
        const double d = t - 1.0;
        pen += s.temp_severe * d * d;
    }
    return pen;
}

double logistic100(double z) { return 100.0 / (1.0 + std::exp(-z)); }

// Additive truncated Gaussian noise: the draw is clamped to +-3 sigma before
// the final [0,100] clamp.
double noisy_score(double mean, double sigma, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double z = std::clamp(gauss(rng), -3.0, 3.0);
    return std::clamp(mean + sigma * z, 0.0, 100.0);
}

}  // namespace

RagParams extract_params(const Configuration& config, const SearchSpace& space) {
    if (const auto v = space.validate(config); !v.empty())
        throw std::invalid_argument("invalid configuration: " + v.front().subject + ": " +
                                    v.front().message);
    RagParams p;
    p.chunk_size = std::get<std::int64_t>(config.values[space.index_of("chunk_size")]);
    p.num_chunks = std::get<std::int64_t>(config.values[space.index_of("num_chunks")]);
    p.chunk_overlap = std::get<std::int64_t>(config.values[space.index_of("chunk_overlap")]);
    p.temperature = std::get<double>(config.values[space.index_of("temperature")]);
    p.rerank_threshold = std::get<double>(config.values[space.index_of("rerank_threshold")]);
    p.llm = std::get<std::string>(config.values[space.index_of("llm")]);
    p.embedding = std::get<std::string>(config.values[space.index_of("embedding")]);
    return p;
}

int surviving_chunks(std::int64_t num_chunks, double rerank_threshold) {
    const double kept = static_cast<double>(num_chunks) * (1.0 - std::sqrt(rerank_threshold));
    return std::max(1, static_cast<int>(std::lround(kept)));
}

TokenCounts token_accounting(const RagParams& params, const QuerySpec& query,
                             const ModelCatalog& catalog) {
    const LlmEntry& llm = llm_entry(catalog, params.llm);
    TokenCounts t;
    t.query = query.tokens;
    t.surviving_chunks = surviving_chunks(params.num_chunks, params.rerank_threshold);
    t.context = static_cast<std::int64_t>(t.surviving_chunks) * params.chunk_size;
    t.prompt_input = t.query + t.context + catalog.prompt_template_tokens;
    t.output = std::lround(static_cast<double>(catalog.output_base_tokens) * llm.verbosity *
                           (1.0 + 0.25 * params.temperature));
    return t;
}

double cost_from_tokens(const TokenCounts& tokens, const RagParams& params,
                        const ModelCatalog& catalog) {
    const LlmEntry& llm = llm_entry(catalog, params.llm);
    const EmbeddingEntry& emb = embedding_entry(catalog, params.embedding);
    return static_cast<double>(tokens.query) * emb.cost_per_token +
           static_cast<double>(tokens.context) * catalog.reranker.cost_per_token +
           static_cast<double>(tokens.prompt_input) * llm.input_cost_per_token +
           static_cast<double>(tokens.output) * llm.output_cost_per_token;
}

double eval_cost(const RagParams& params, const QuerySpec& query, const ModelCatalog& catalog) {
    return cost_from_tokens(token_accounting(params, query, catalog), params, catalog);
}

double latency_from_tokens(const TokenCounts& tokens, const RagParams& params,
                           const ModelCatalog& catalog) {
    const LlmEntry& llm = llm_entry(catalog, params.llm);
    const EmbeddingEntry& emb = embedding_entry(catalog, params.embedding);
    const double embedding_latency =
        emb.latency_base_s + emb.latency_per_token_s * static_cast<double>(tokens.query);
    const double reranker_latency =
        catalog.reranker.latency_per_token_s * static_cast<double>(tokens.context);
    const double llm_latency =
        llm.latency_base_s +
        llm.latency_per_token_s * static_cast<double>(tokens.prompt_input + tokens.output);
    return embedding_latency + reranker_latency + llm_latency + catalog.evaluation_latency_s;
}

double eval_latency(const RagParams& params, const QuerySpec& query, const ModelCatalog& catalog,
                    std::uint64_t seed) {
    const double base = latency_from_tokens(token_accounting(params, query, catalog), params, catalog);
    Rng rng(mix64(seed, 0x1a7e11c1ull));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double z = gauss(rng);
    return base * std::exp(catalog.latency_noise_sigma * z);
}

QualityScores eval_quality(const RagParams& params, const QuerySpec& query,
                           const ModelCatalog& catalog, std::uint64_t seed) {
    const QualitySurface& s = catalog.surface;
    const LlmEntry& llm = llm_entry(catalog, params.llm);
    const EmbeddingEntry& emb = embedding_entry(catalog, params.embedding);
    const TokenCounts tokens = token_accounting(params, query, catalog);

    const double sufficiency =
        std::min(1.0, static_cast<double>(tokens.context) /
                          std::max(1.0, static_cast<double>(query.ideal_context_tokens)));
    const double oversize = std::max(
        0.0, static_cast<double>(tokens.context) /
                     std::max(1.0, static_cast<double>(query.ideal_context_tokens)) -
                 1.0);
    const double pen = temperature_penalty(s, params.temperature);

    const double safety_z = s.safety_bias + s.safety_context * sufficiency +
                            s.safety_llm * (llm.quality - 0.5) + s.safety_embed * (emb.quality - 0.5) -
                            s.safety_difficulty * query.difficulty - pen;
    const double align_z = s.align_bias + s.align_context * sufficiency +
                           s.align_llm * (llm.quality - 0.5) + s.align_embed * (emb.quality - 0.5) -
                           s.align_difficulty * query.difficulty - s.align_temp_factor * pen -
                           s.align_verbosity * oversize;

    Rng rng(mix64(seed, 0x5afe7ull));
    QualityScores out;
    out.safety = noisy_score(logistic100(safety_z), catalog.quality_noise_sigma, rng);
    out.alignment = noisy_score(logistic100(align_z), catalog.quality_noise_sigma, rng);
    return out;
}

QueryEvaluation evaluate_query(const RagParams& params, const QuerySpec& query,
                               const ModelCatalog& catalog, std::uint64_t seed) {
    QueryEvaluation e;
    e.tokens = token_accounting(params, query, catalog);
    e.cost_usd = cost_from_tokens(e.tokens, params, catalog);
    e.latency_s = eval_latency(params, query, catalog, seed);
    const auto q = eval_quality(params, query, catalog, seed);
    e.safety = q.safety;
    e.alignment = q.alignment;
    return e;
}

WorkloadEvaluation evaluate(const Configuration& config, const SearchSpace& space,
                            const Workload& workload, const ModelCatalog& catalog,
                            std::uint64_t seed, Exec exec) {
    if (workload.queries.empty()) throw std::invalid_argument("evaluate: empty workload");
    const RagParams params = extract_params(config, space);
    const auto n = static_cast<std::int64_t>(workload.queries.size());
    std::vector<QueryEvaluation> evals(workload.queries.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
    for (std::int64_t i = 0; i < n; ++i)
        evals[i] = evaluate_query(params, workload.queries[i], catalog,
                                  mix64(seed, static_cast<std::uint64_t>(i)));
    // Serial accumulation keeps the mean independent of the thread schedule.
    WorkloadEvaluation out;
    for (const auto& e : evals) {
        out.cost_usd_per_query += e.cost_usd;
        out.latency_s += e.latency_s;
        out.safety += e.safety;
        out.alignment += e.alignment;
    }
    const auto count = static_cast<double>(workload.queries.size());
    out.cost_usd_per_query /= count;
    out.latency_s /= count;
    out.safety /= count;
    out.alignment /= count;
    return out;
}

Workload generate_workload(const std::string& split, std::size_t n_queries, std::uint64_t seed) {
    Workload w;
    w.split = split;
    w.queries.reserve(n_queries);
    Rng rng(mix64(seed, 0x3091c10adull));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n_queries; ++i) {
        QuerySpec q;
        q.tokens = static_cast<int>(
            std::lround(std::exp(std::log(10.0) + unit(rng) * (std::log(60.0) - std::log(10.0)))));
        q.difficulty = unit(rng);
        q.ideal_context_tokens = static_cast<int>(std::lround(
            std::exp(std::log(256.0) + unit(rng) * (std::log(3072.0) - std::log(256.0)))));
        w.queries.push_back(q);
    }
    return w;
}

ModelCatalog parse_catalog_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ModelCatalog c;
    for (const auto& [name, e] : j.at("llms").items()) {
        LlmEntry l;
        l.input_cost_per_token = e.at("input_cost_per_token").get<double>();
        l.output_cost_per_token = e.at("output_cost_per_token").get<double>();
        l.latency_base_s = e.at("latency_base_s").get<double>();
        l.latency_per_token_s = e.at("latency_per_token_s").get<double>();
        l.quality = e.at("quality").get<double>();
        l.verbosity = e.at("verbosity").get<double>();
        if (l.quality < 0.0 || l.quality > 1.0)
            throw std::invalid_argument("LLM " + name + ": quality must lie in [0,1]");
        c.llms[name] = l;
    }
    for (const auto& [name, e] : j.at("embeddings").items()) {
        EmbeddingEntry m;
        m.cost_per_token = e.at("cost_per_token").get<double>();
        m.latency_base_s = e.at("latency_base_s").get<double>();
        m.latency_per_token_s = e.at("latency_per_token_s").get<double>();
        m.quality = e.at("quality").get<double>();
        if (m.quality < 0.0 || m.quality > 1.0)
            throw std::invalid_argument("embedding " + name + ": quality must lie in [0,1]");
        c.embeddings[name] = m;
    }
    c.reranker.cost_per_token = j.at("reranker").at("cost_per_token").get<double>();
    c.reranker.latency_per_token_s = j.at("reranker").at("latency_per_token_s").get<double>();
    c.evaluation_latency_s = j.at("evaluation_latency_s").get<double>();
    c.prompt_template_tokens = j.value("prompt_template_tokens", 60);
    c.output_base_tokens = j.value("output_base_tokens", 120);
    if (j.contains("noise")) {
        c.latency_noise_sigma = j.at("noise").value("latency_sigma", 0.05);
        c.quality_noise_sigma = j.at("noise").value("quality_sigma", 2.0);
    }
    if (j.contains("quality_surface")) {
        const auto& q = j.at("quality_surface");
        QualitySurface s;
        s.safety_bias = q.value("safety_bias", s.safety_bias);
        s.safety_context = q.value("safety_context", s.safety_context);
        s.safety_llm = q.value("safety_llm", s.safety_llm);
        s.safety_embed = q.value("safety_embed", s.safety_embed);
        s.safety_difficulty = q.value("safety_difficulty", s.safety_difficulty);
        s.align_bias = q.value("align_bias", s.align_bias);
        s.align_context = q.value("align_context", s.align_context);
        s.align_llm = q.value("align_llm", s.align_llm);
        s.align_embed = q.value("align_embed", s.align_embed);
        s.align_difficulty = q.value("align_difficulty", s.align_difficulty);
        s.align_verbosity = q.value("align_verbosity", s.align_verbosity);
        s.temp_knee = q.value("temp_knee", s.temp_knee);
        s.temp_quad = q.value("temp_quad", s.temp_quad);
        s.temp_severe = q.value("temp_severe", s.temp_severe);
        s.align_temp_factor = q.value("align_temp_factor", s.align_temp_factor);
        c.surface = s;
    }
    return c;
}

ModelCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open catalog file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_catalog_json(ss.str());
}

Workload parse_workload_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Workload w;
    w.split = j.value("split", "train");
    for (const auto& q : j.at("queries")) {
        QuerySpec spec;
        spec.tokens = q.at("tokens").get<int>();
        spec.difficulty = q.at("difficulty").get<double>();
        spec.ideal_context_tokens = q.at("ideal_context_tokens").get<int>();
        if (spec.tokens <= 0) throw std::invalid_argument("workload query token count must be > 0");
        w.queries.push_back(spec);
    }
    if (w.queries.empty()) throw std::invalid_argument("workload has no queries");
    return w;
}

Workload load_workload(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open workload file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_workload_json(ss.str());
}

}  // namespace ragopt
