#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ragopt/parallel.hpp"
#include "ragopt/pareto.hpp"
#include "ragopt/space.hpp"

namespace ragopt {

struct LlmEntry {
    double input_cost_per_token = 0.0;   // $/token
    double output_cost_per_token = 0.0;  // $/token
    double latency_base_s = 0.0;
    double latency_per_token_s = 0.0;    // applied to input + output tokens
    double quality = 0.0;                // [0,1]
    double verbosity = 1.0;              // output-length factor
};

struct EmbeddingEntry {
    double cost_per_token = 0.0;
    double latency_base_s = 0.0;
    double latency_per_token_s = 0.0;    // applied to query tokens
    double quality = 0.0;                // [0,1]
};

struct RerankerEntry {
    double cost_per_token = 0.0;         // applied to context tokens
    double latency_per_token_s = 0.0;
};

// Weights of the synthetic safety/alignment response surfaces. The surfaces
// are declared stand-ins for live response scoring: logistic blend of
// context sufficiency, model quality factors, query difficulty, and a
// piecewise-quadratic temperature penalty (flat below the knee, severe past
// 1.0), with a mild oversized-context penalty on alignment only.
struct QualitySurface {
    double safety_bias = 0.0;
    double safety_context = 2.2;
    double safety_llm = 2.0;
    double safety_embed = 1.2;
    double safety_difficulty = 1.5;

    double align_bias = -0.4;
    double align_context = 1.4;
    double align_llm = 1.6;
    double align_embed = 0.5;
    double align_difficulty = 0.8;
    double align_verbosity = 0.25;

    double temp_knee = 0.8;
    double temp_quad = 1.5;
    double temp_severe = 8.0;
    double align_temp_factor = 0.8;
};

struct ModelCatalog {
    std::map<std::string, LlmEntry> llms;
    std::map<std::string, EmbeddingEntry> embeddings;
    RerankerEntry reranker;
    double evaluation_latency_s = 0.0;
    int prompt_template_tokens = 60;
    int output_base_tokens = 120;
    double latency_noise_sigma = 0.05;   // multiplicative log-normal
    double quality_noise_sigma = 2.0;    // additive truncated Gaussian
    QualitySurface surface;
};

struct QuerySpec {
    int tokens = 0;
    double difficulty = 0.0;             // [0,1]
    int ideal_context_tokens = 0;
};

struct Workload {
    std::string split;                   // "train" or "test"
    std::vector<QuerySpec> queries;
};

struct TokenCounts {
    std::int64_t query = 0;
    std::int64_t context = 0;
    std::int64_t prompt_input = 0;
    std::int64_t output = 0;
    int surviving_chunks = 0;
};

struct QueryEvaluation {
    double cost_usd = 0.0;               // $/query
    double latency_s = 0.0;
    double safety = 0.0;                 // [0,100]
    double alignment = 0.0;              // [0,100]
    TokenCounts tokens;
};

// Pipeline parameters pulled out of a Configuration once per evaluation.
struct RagParams {
    std::int64_t chunk_size = 0;
    std::int64_t num_chunks = 0;
    std::int64_t chunk_overlap = 0;
    double temperature = 0.0;
    double rerank_threshold = 0.0;
    std::string llm;
    std::string embedding;
};

// Per-workload objective means, paper units, before canonical orientation.
struct WorkloadEvaluation {
    double cost_usd_per_query = 0.0;
    double latency_s = 0.0;
    double safety = 0.0;
    double alignment = 0.0;

    double cost_usd_per_million() const { return cost_usd_per_query * 1e6; }
    // Canonical maximization orientation: (-cost $/M, -latency s, safety, alignment).
    ObjectiveVector canonical() const {
        return {-cost_usd_per_million(), -latency_s, safety, alignment};
    }
};

inline const std::vector<std::string>& objective_names() {
    static const std::vector<std::string> names = {"cost", "latency", "safety", "alignment"};
    return names;
}

RagParams extract_params(const Configuration& config, const SearchSpace& space);

// Chunks surviving the rerank threshold: max(1, round(c_n * (1 - sqrt(r)))).
// Endpoints match the stated reranker behavior: r=1 keeps only the top
// chunk, r=0 keeps all retrieved chunks.
int surviving_chunks(std::int64_t num_chunks, double rerank_threshold);

TokenCounts token_accounting(const RagParams& params, const QuerySpec& query,
                             const ModelCatalog& catalog);

// cost = query*embed + context*rerank + prompt_input*llm_in + output*llm_out.
double cost_from_tokens(const TokenCounts& tokens, const RagParams& params,
                        const ModelCatalog& catalog);
double eval_cost(const RagParams& params, const QuerySpec& query, const ModelCatalog& catalog);

// latency = embedding + reranker + LLM response + evaluation latency, with
// multiplicative log-normal noise (sigma from the catalog; 0 disables).
double latency_from_tokens(const TokenCounts& tokens, const RagParams& params,
                           const ModelCatalog& catalog);
double eval_latency(const RagParams& params, const QuerySpec& query, const ModelCatalog& catalog,
                    std::uint64_t seed);

struct QualityScores {
    double safety = 0.0;
    double alignment = 0.0;
};
QualityScores eval_quality(const RagParams& params, const QuerySpec& query,
                           const ModelCatalog& catalog, std::uint64_t seed);

QueryEvaluation evaluate_query(const RagParams& params, const QuerySpec& query,
                               const ModelCatalog& catalog, std::uint64_t seed);

// Workload Monte-Carlo mean of the per-query objectives. Per-query seeds are
// derived from (seed, query index) so results are independent of scheduling.
WorkloadEvaluation evaluate(const Configuration& config, const SearchSpace& space,
                            const Workload& workload, const ModelCatalog& catalog,
                            std::uint64_t seed, Exec exec = Exec::Parallel);

Workload generate_workload(const std::string& split, std::size_t n_queries, std::uint64_t seed);

ModelCatalog parse_catalog_json(const std::string& text);
ModelCatalog load_catalog(const std::string& path);
Workload parse_workload_json(const std::string& text);
Workload load_workload(const std::string& path);

}  // namespace ragopt
