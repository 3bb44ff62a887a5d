#pragma once

#include <string>
#include <vector>

#include "dsearch/corpus.hpp"

namespace dsearch {

struct SamplePlan {
    std::size_t target_total = 0;      // N
    std::size_t per_domain_quota = 0;  // ceil(N / m)
    std::vector<std::string> domains;  // order of first appearance in the input

    json to_json() const;
};

SamplePlan make_sample_plan(const std::vector<AnnotatedQuery>& dataset, std::size_t n);

struct DomainSampleStats {
    std::string domain;
    std::size_t pool_size = 0;
    std::size_t selected = 0;
    std::size_t passes = 0;
};

struct SampleResult {
    std::vector<AnnotatedQuery> selected;  // domain-major, acceptance order
    // Pass index (0-based, per domain) each selected item was accepted in;
    // parallel to `selected`.
    std::vector<std::size_t> pass_of_selected;
    SamplePlan plan;
    std::vector<DomainSampleStats> per_domain;

    json report_json() const;
};

// Greedy diversity-aware selection. Per domain (in order of first
// appearance), candidates are visited in descending interrogative_count
// order (stable). Selection runs in passes: within one pass the accepted
// keyword sets stay pairwise disjoint; the conflict set resets between
// passes. Passes repeat until the quota ceil(n/m) is filled or the pool
// runs dry. The concatenated result is truncated to exactly n.
SampleResult sample_diverse_traced(const std::vector<AnnotatedQuery>& dataset, std::size_t n);

std::vector<AnnotatedQuery> sample_diverse(const std::vector<AnnotatedQuery>& dataset,
                                           std::size_t n);

}  // namespace dsearch
