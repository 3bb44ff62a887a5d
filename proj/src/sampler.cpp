#include "dsearch/sampler.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace dsearch {

json SamplePlan::to_json() const {
    return json{{"target_total", target_total},
                {"per_domain_quota", per_domain_quota},
                {"domains", domains}};
}

SamplePlan make_sample_plan(const std::vector<AnnotatedQuery>& dataset, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    SamplePlan plan;
    plan.target_total = n;
    std::unordered_set<std::string> seen;
    for (const auto& item : dataset)
        if (seen.insert(item.domain).second) plan.domains.push_back(item.domain);
    const std::size_t m = std::max<std::size_t>(1, plan.domains.size());
    plan.per_domain_quota = (n + m - 1) / m;  // ceil(n / m)
    return plan;
}

json SampleResult::report_json() const {
    json domains = json::array();
    for (const auto& d : per_domain)
        domains.push_back({{"domain", d.domain},
                           {"pool_size", d.pool_size},
                           {"selected", d.selected},
                           {"passes", d.passes}});
    return json{{"plan", plan.to_json()},
                {"selected_total", selected.size()},
                {"per_domain", std::move(domains)}};
}

SampleResult sample_diverse_traced(const std::vector<AnnotatedQuery>& dataset, std::size_t n) {
    SampleResult result;
    result.plan = make_sample_plan(dataset, n);
    if (dataset.empty()) return result;

    for (const auto& domain : result.plan.domains) {
        // Pool of indices for this domain, sorted by descending
        // interrogative_count; stable_sort keeps input order on ties.
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset[i].domain == domain) pool.push_back(i);
        std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
            return dataset[a].interrogative_count > dataset[b].interrogative_count;
        });

        DomainSampleStats stats;
        stats.domain = domain;
        stats.pool_size = pool.size();

        std::size_t selected_in_domain = 0;
        std::size_t pass = 0;
        while (selected_in_domain < result.plan.per_domain_quota && !pool.empty()) {
            std::unordered_set<std::string> pass_keywords;
            std::vector<std::size_t> remaining;
            remaining.reserve(pool.size());
            for (std::size_t k = 0; k < pool.size(); ++k) {
                const std::size_t idx = pool[k];
                if (selected_in_domain >= result.plan.per_domain_quota) {
                    remaining.insert(remaining.end(), pool.begin() + k, pool.end());
                    break;
                }
                const auto& keywords = dataset[idx].keywords;
                const bool disjoint =
                    std::none_of(keywords.begin(), keywords.end(), [&](const std::string& kw) {
                        return pass_keywords.count(kw) > 0;
                    });
                if (disjoint) {
                    result.selected.push_back(dataset[idx]);
                    result.pass_of_selected.push_back(pass);
                    pass_keywords.insert(keywords.begin(), keywords.end());
                    ++selected_in_domain;
                } else {
                    remaining.push_back(idx);
                }
            }
            pool = std::move(remaining);
            ++pass;
        }
        stats.selected = selected_in_domain;
        stats.passes = pass;
        result.per_domain.push_back(std::move(stats));
    }

    // Ceiling quotas can overshoot the requested budget; trim the tail.
    if (result.selected.size() > n) {
        result.selected.resize(n);
        result.pass_of_selected.resize(n);
        for (auto& stats : result.per_domain) {
            stats.selected = static_cast<std::size_t>(
                std::count_if(result.selected.begin(), result.selected.end(),
                              [&](const AnnotatedQuery& q) { return q.domain == stats.domain; }));
        }
    }
    return result;
}

std::vector<AnnotatedQuery> sample_diverse(const std::vector<AnnotatedQuery>& dataset,
                                           std::size_t n) {
    return sample_diverse_traced(dataset, n).selected;
}

}  // namespace dsearch
