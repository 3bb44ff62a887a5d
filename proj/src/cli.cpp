#include "dsearch/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include "dsearch/config.hpp"
#include "dsearch/corpus.hpp"
#include "dsearch/curation.hpp"
#include "dsearch/digest.hpp"
#include "dsearch/errors.hpp"
#include "dsearch/eval.hpp"
#include "dsearch/export.hpp"
#include "dsearch/http_gateways.hpp"
#include "dsearch/manifest.hpp"
#include "dsearch/mocks.hpp"
#include "dsearch/orchestrator.hpp"
#include "dsearch/replay.hpp"
#include "dsearch/sampler.hpp"

namespace dsearch {

namespace {

namespace fs = std::filesystem;

enum class BackendMode { mock, replay, live };

struct CliOptions {
    std::string config_file;
    std::string mode = "mock";
    std::string replay_dir;
    std::string record_dir;
    std::string out_dir;
    std::string cache_dir;
    std::string in_path;
    std::string search_fixture;
    std::string llm_endpoint;
    std::string search_endpoint;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned concurrency = 0;
    bool force = false;

    // command-specific
    std::size_t sample_n = 0;
    std::string corpus_format = "jsonl";
    std::string strong_path;
    std::string weak_path;
    std::string metrics = "f1,stats,stages";
    bool use_judge = false;
};

struct Backends {
    std::shared_ptr<ReplayArchive> archive;
    std::shared_ptr<LlmClient> annotator;
    std::shared_ptr<LlmClient> reasoner;
    std::shared_ptr<LlmClient> summarizer;
    std::shared_ptr<LlmClient> judge;
    std::shared_ptr<SearchClient> search;
};

struct Context {
    PipelineConfig config;
    CliOptions opts;
    BackendMode mode = BackendMode::mock;
    Backends backends;

    std::string out_dir() const { return config.paths.output_dir; }
    fs::path out_path(const std::string& name) const { return fs::path(out_dir()) / name; }
};

BackendMode parse_mode(const CliOptions& opts) {
    if (!opts.replay_dir.empty()) return BackendMode::replay;
    if (opts.mode == "mock") return BackendMode::mock;
    if (opts.mode == "live") return BackendMode::live;
    if (opts.mode == "replay") return BackendMode::replay;
    throw ConfigError("mode", "expected mock, replay or live");
}

Backends make_backends(const PipelineConfig& config, BackendMode mode,
                       const CliOptions& opts) {
    Backends backends;

    if (mode == BackendMode::replay) {
        const std::string dir =
            !opts.replay_dir.empty() ? opts.replay_dir : config.paths.cache_dir;
        backends.archive = std::make_shared<ReplayArchive>(dir);
        auto llm = [&](const char*) -> std::shared_ptr<LlmClient> {
            return std::make_shared<CachedLlmClient>(backends.archive, CacheMode::replay);
        };
        backends.annotator = llm("annotator");
        backends.reasoner = llm("reasoner");
        backends.summarizer = llm("summarizer");
        backends.judge = llm("judge");
        backends.search =
            std::make_shared<CachedSearchClient>(backends.archive, CacheMode::replay);
        return backends;
    }

    if (mode == BackendMode::mock) {
        backends.annotator = std::make_shared<ScriptedLlmClient>(
            mock_annotator_script(config.domain_labels));
        backends.reasoner =
            std::make_shared<ScriptedLlmClient>(mock_reasoner_script(config.loop));
        backends.summarizer = std::make_shared<ScriptedLlmClient>(mock_summarizer_script());
        backends.judge = std::make_shared<ScriptedLlmClient>(mock_judge_script());
        auto fixture = std::make_shared<FixtureSearchClient>(config.loop.doc_char_budget);
        if (!opts.search_fixture.empty()) fixture->load_file(opts.search_fixture);
        backends.search = fixture;
    } else {
        if (config.gateways.llm_endpoint.empty())
            throw ConfigError("gateways.llm_endpoint", "required for --live");
        if (config.gateways.search_endpoint.empty())
            throw ConfigError("gateways.search_endpoint", "required for --live");
        HttpEndpoint llm_endpoint;
        llm_endpoint.url = config.gateways.llm_endpoint;
        llm_endpoint.credential = config.gateways.llm_credential;
        auto live_llm = std::make_shared<HttpLlmClient>(llm_endpoint);
        backends.annotator = live_llm;
        backends.reasoner = live_llm;
        backends.summarizer = live_llm;
        backends.judge = live_llm;
        HttpEndpoint search_endpoint;
        search_endpoint.url = config.gateways.search_endpoint;
        search_endpoint.credential = config.gateways.search_credential;
        backends.search = std::make_shared<HttpSearchClient>(
            search_endpoint, config.gateways.search_provider, config.loop.doc_char_budget);
    }

    if (!opts.record_dir.empty()) {
        backends.archive = std::make_shared<ReplayArchive>(opts.record_dir);
        backends.annotator = std::make_shared<CachedLlmClient>(
            backends.archive, CacheMode::record, backends.annotator);
        backends.reasoner = std::make_shared<CachedLlmClient>(
            backends.archive, CacheMode::record, backends.reasoner);
        backends.summarizer = std::make_shared<CachedLlmClient>(
            backends.archive, CacheMode::record, backends.summarizer);
        backends.judge = std::make_shared<CachedLlmClient>(backends.archive, CacheMode::record,
                                                           backends.judge);
        backends.search = std::make_shared<CachedSearchClient>(
            backends.archive, CacheMode::record, backends.search);
    }
    return backends;
}

std::string require_artifact(const std::string& path, const std::string& what,
                             const std::string& producer) {
    if (!fs::exists(path)) throw DependencyError(what, producer);
    return path;
}

// Shared manifest bookkeeping: returns true when the command can be
// skipped, otherwise runs `body` and writes the manifest afterwards.
bool run_stage(Context& ctx, const std::string& command,
               const std::map<std::string, std::string>& inputs,
               const std::function<std::vector<std::string>(json& extra)>& body) {
    fs::create_directories(ctx.out_dir());
    const std::string manifest_path = ctx.out_path(command + ".manifest.json").string();
    const std::string config_hash = ctx.config.config_hash();

    std::map<std::string, std::string> input_digests;
    for (const auto& [path, _] : inputs) input_digests[path] = sha256_file(path);

    if (!ctx.opts.force &&
        up_to_date(manifest_path, ctx.out_dir(), command, config_hash, input_digests)) {
        std::cout << command << ": up-to-date, skipping (use --force to rerun)\n";
        return true;
    }

    Manifest manifest;
    manifest.command = command;
    manifest.config_hash = config_hash;
    manifest.version = kToolVersion;
    manifest.inputs = input_digests;
    manifest.extra = json::object();

    const std::vector<std::string> outputs = body(manifest.extra);
    for (const auto& relative : outputs)
        manifest.outputs[relative] = sha256_file(ctx.out_path(relative).string());
    save_manifest(manifest_path, manifest);
    return false;
}

int cmd_annotate(Context& ctx) {
    const std::string in =
        !ctx.opts.in_path.empty() ? ctx.opts.in_path : ctx.config.paths.corpus;
    if (in.empty()) throw ConfigError("paths.corpus", "no input corpus given");
    if (!fs::exists(in)) throw ConfigError("paths.corpus", "file not found: " + in);
    const CorpusFormat format =
        ctx.opts.corpus_format == "tsv" ? CorpusFormat::tsv : CorpusFormat::jsonl;

    run_stage(ctx, "annotate", {{in, ""}}, [&](json& extra) {
        const auto records = load_qa_dataset(in, format);
        const auto annotated =
            annotate_all(records, *ctx.backends.annotator, ctx.config.domain_labels,
                         ctx.config.concurrency, ctx.config.interrogative_lexicon);
        std::vector<json> rows;
        rows.reserve(annotated.size());
        for (const auto& a : annotated) rows.push_back(a.to_json());
        write_jsonl(ctx.out_path("annotated.jsonl").string(), rows);
        extra["records"] = records.size();
        std::cout << "annotate: " << annotated.size() << " records -> annotated.jsonl\n";
        return std::vector<std::string>{"annotated.jsonl"};
    });
    return kExitOk;
}

int cmd_sample(Context& ctx) {
    if (ctx.opts.sample_n == 0) throw ConfigError("sample.n", "-n must be >= 1");
    const std::string in = !ctx.opts.in_path.empty()
                               ? ctx.opts.in_path
                               : ctx.out_path("annotated.jsonl").string();
    require_artifact(in, "annotated queries", "annotate");

    run_stage(ctx, "sample", {{in, ""}}, [&](json& extra) {
        std::vector<AnnotatedQuery> queries;
        for (const auto& row : read_jsonl(in)) queries.push_back(AnnotatedQuery::from_json(row));
        const SampleResult result = sample_diverse_traced(queries, ctx.opts.sample_n);

        std::vector<json> rows;
        rows.reserve(result.selected.size());
        for (const auto& q : result.selected) rows.push_back(q.to_json());
        write_jsonl(ctx.out_path("selected.jsonl").string(), rows);
        write_file_atomic(ctx.out_path("sample_report.json").string(),
                          result.report_json().dump(2) + "\n");
        extra["requested"] = ctx.opts.sample_n;
        std::cout << "sample: selected " << result.selected.size() << " of " << queries.size()
                  << " -> selected.jsonl\n";
        return std::vector<std::string>{"selected.jsonl", "sample_report.json"};
    });
    return kExitOk;
}

int cmd_synthesize(Context& ctx) {
    const std::string in = !ctx.opts.in_path.empty()
                               ? ctx.opts.in_path
                               : ctx.out_path("selected.jsonl").string();
    require_artifact(in, "selected queries", "sample");

    run_stage(ctx, "synthesize", {{in, ""}}, [&](json& extra) {
        std::vector<AnnotatedQuery> queries;
        for (const auto& row : read_jsonl(in)) queries.push_back(AnnotatedQuery::from_json(row));

        std::vector<std::vector<Trajectory>> per_query(queries.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= queries.size()) return;
                const std::uint64_t base =
                    ctx.config.seed +
                    static_cast<std::uint64_t>(i) *
                        static_cast<std::uint64_t>(ctx.config.loop.candidates_per_query);
                per_query[i] = sample_candidates(queries[i], ctx.config.loop,
                                                 *ctx.backends.reasoner, *ctx.backends.search,
                                                 *ctx.backends.summarizer, base);
            }
        };
        const unsigned workers =
            std::max(1u, std::min<unsigned>(ctx.config.concurrency,
                                            static_cast<unsigned>(std::max<std::size_t>(
                                                1, queries.size()))));
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < workers; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();

        std::vector<json> rows;
        std::size_t errors = 0;
        for (const auto& group : per_query) {
            for (const auto& t : group) {
                if (t.stop_reason == StopReason::backend_error) ++errors;
                rows.push_back(t.to_json());
            }
        }
        write_jsonl(ctx.out_path("trajectories.jsonl").string(), rows);
        extra["seed"] = ctx.config.seed;
        extra["queries"] = queries.size();
        extra["trajectories"] = rows.size();
        extra["backend_errors"] = errors;
        if (ctx.backends.archive) {
            extra["cache"] = json{{"dir", ctx.backends.archive->dir()},
                                  {"entries_used", ctx.backends.archive->touched_count()},
                                  {"digest", ctx.backends.archive->touched_digest()}};
        }
        std::cout << "synthesize: " << rows.size() << " trajectories ("
                  << errors << " backend errors) -> trajectories.jsonl\n";
        return std::vector<std::string>{"trajectories.jsonl"};
    });
    return kExitOk;
}

std::map<std::string, std::vector<Trajectory>> group_by_question(
    const std::vector<Trajectory>& trajectories) {
    std::map<std::string, std::vector<Trajectory>> grouped;
    for (const auto& t : trajectories) grouped[t.query.record.id].push_back(t);
    return grouped;
}

int cmd_curate(Context& ctx) {
    const std::string in = !ctx.opts.in_path.empty()
                               ? ctx.opts.in_path
                               : ctx.out_path("trajectories.jsonl").string();
    require_artifact(in, "trajectories", "synthesize");

    run_stage(ctx, "curate", {{in, ""}}, [&](json& extra) {
        const auto grouped = group_by_question(read_trajectories_jsonl(in));

        CorrectnessOracle oracle = f1_oracle(ctx.config.curation.f1_threshold);
        if (ctx.opts.use_judge) {
            auto judge = ctx.backends.judge;
            const double threshold = ctx.config.curation.f1_threshold;
            oracle = [judge, threshold](const Trajectory& t,
                                        const std::vector<std::string>& golds) {
                if (!t.final_answer || golds.empty()) return false;
                if (best_f1(*t.final_answer, golds) >= threshold) return true;
                const auto verdict =
                    llm_judge(t.query.record.question, *t.final_answer, golds, *judge);
                return verdict.value_or(false);
            };
        }

        const CurationOutcome outcome = curate(grouped, ctx.config.curation, oracle);

        std::vector<json> curated_rows, audit_rows, survivor_rows;
        for (const auto& entry : outcome.curated) curated_rows.push_back(entry.to_json());
        for (const auto& entry : outcome.audit) audit_rows.push_back(entry.to_json());
        for (const auto& t : outcome.non_selected_survivors)
            survivor_rows.push_back(t.to_json());
        write_jsonl(ctx.out_path("curated.jsonl").string(), curated_rows);
        write_jsonl(ctx.out_path("audit.jsonl").string(), audit_rows);
        write_jsonl(ctx.out_path("survivors.jsonl").string(), survivor_rows);

        extra["questions"] = grouped.size();
        extra["curated"] = curated_rows.size();
        extra["rejections"] = audit_rows.size();
        std::cout << "curate: kept " << curated_rows.size() << " of " << grouped.size()
                  << " questions; " << audit_rows.size() << " rejections -> curated.jsonl\n";
        return std::vector<std::string>{"curated.jsonl", "audit.jsonl", "survivors.jsonl"};
    });
    return kExitOk;
}

int cmd_export_sft(Context& ctx) {
    const std::string curated_path = ctx.out_path("curated.jsonl").string();
    const std::string traj_path = !ctx.opts.in_path.empty()
                                      ? ctx.opts.in_path
                                      : ctx.out_path("trajectories.jsonl").string();
    require_artifact(curated_path, "curated output", "curate");
    require_artifact(traj_path, "trajectories", "synthesize");

    run_stage(ctx, "export-sft", {{curated_path, ""}, {traj_path, ""}}, [&](json& extra) {
        std::map<std::string, Trajectory> by_id;
        for (auto& t : read_trajectories_jsonl(traj_path)) by_id[t.id] = std::move(t);

        std::vector<json> rows;
        for (const auto& row : read_jsonl(curated_path)) {
            const std::string ref = row.at("trajectory_ref").get<std::string>();
            const auto it = by_id.find(ref);
            if (it == by_id.end())
                throw IntegrityError("curated entry references unknown trajectory " + ref);
            rows.push_back(to_sft_example(it->second).to_json());
        }
        write_jsonl(ctx.out_path("sft.jsonl").string(), rows);
        extra["examples"] = rows.size();
        std::cout << "export-sft: " << rows.size() << " examples -> sft.jsonl\n";
        return std::vector<std::string>{"sft.jsonl"};
    });
    return kExitOk;
}

int cmd_export_dpo(Context& ctx) {
    if (ctx.opts.strong_path.empty() || ctx.opts.weak_path.empty())
        throw ConfigError("export-dpo", "--strong and --weak trajectory files are required");
    require_artifact(ctx.opts.strong_path, "strong-pool trajectories", "synthesize");
    require_artifact(ctx.opts.weak_path, "weak-pool trajectories", "synthesize");

    run_stage(ctx, "export-dpo",
              {{ctx.opts.strong_path, ""}, {ctx.opts.weak_path, ""}}, [&](json& extra) {
                  const auto strong =
                      group_by_question(read_trajectories_jsonl(ctx.opts.strong_path));
                  const auto weak =
                      group_by_question(read_trajectories_jsonl(ctx.opts.weak_path));
                  const auto pairs = build_dpo_pairs(strong, weak, ctx.config.curation);

                  std::vector<json> rows;
                  for (const auto& pair : pairs) rows.push_back(pair.to_json());
                  write_jsonl(ctx.out_path("dpo.jsonl").string(), rows);
                  extra["pairs"] = rows.size();
                  std::cout << "export-dpo: " << rows.size() << " pairs -> dpo.jsonl\n";
                  return std::vector<std::string>{"dpo.jsonl"};
              });
    return kExitOk;
}

RewardConfig reward_config_from(const PipelineConfig& config) {
    RewardConfig reward;
    reward.marker_lexicon = config.curation.reflection_lexicon;
    reward.begin_result_token = config.loop.begin_result_token;
    reward.end_result_token = config.loop.end_result_token;
    reward.answer_marker = config.loop.answer_marker;
    return reward;
}

int cmd_reward(Context& ctx) {
    const std::string in = !ctx.opts.in_path.empty()
                               ? ctx.opts.in_path
                               : ctx.out_path("trajectories.jsonl").string();
    require_artifact(in, "trajectories", "synthesize");

    run_stage(ctx, "reward", {{in, ""}}, [&](json& extra) {
        const RewardConfig reward_cfg = reward_config_from(ctx.config);
        std::vector<json> rows;
        for (const auto& t : read_trajectories_jsonl(in)) {
            const RewardBreakdown reward =
                rl_reward(t, t.query.record.gold_answers, reward_cfg);
            rows.push_back(reward.to_json(t.id));
        }
        write_jsonl(ctx.out_path("rewards.jsonl").string(), rows);
        extra["trajectories"] = rows.size();
        std::cout << "reward: " << rows.size() << " rewards -> rewards.jsonl\n";
        return std::vector<std::string>{"rewards.jsonl"};
    });
    return kExitOk;
}

int cmd_eval(Context& ctx) {
    const std::string in = !ctx.opts.in_path.empty()
                               ? ctx.opts.in_path
                               : ctx.out_path("trajectories.jsonl").string();
    require_artifact(in, "trajectories", "synthesize");

    run_stage(ctx, "eval", {{in, ""}}, [&](json& extra) {
        EvalSelection selection;
        selection.with_f1 = ctx.opts.metrics.find("f1") != std::string::npos;
        selection.with_judge = ctx.opts.metrics.find("judge") != std::string::npos;
        selection.with_stats = ctx.opts.metrics.find("stats") != std::string::npos;
        selection.with_stages = ctx.opts.metrics.find("stages") != std::string::npos;

        const auto trajectories = read_trajectories_jsonl(in);
        const EvalReport report =
            evaluate(trajectories, ctx.backends.judge.get(), selection);

        std::vector<json> rows;
        for (const auto& item : report.items) rows.push_back(item.to_json());
        write_jsonl(ctx.out_path("eval_report.jsonl").string(), rows);
        write_file_atomic(ctx.out_path("eval_report.json").string(),
                          report.aggregate_json().dump(2) + "\n");
        write_file_atomic(ctx.out_path("eval_report.txt").string(), report.to_table());
        extra["items"] = report.items.size();
        std::cout << report.to_table();
        return std::vector<std::string>{"eval_report.jsonl", "eval_report.json",
                                        "eval_report.txt"};
    });
    return kExitOk;
}

int cmd_stats(Context& ctx) {
    const std::string in = !ctx.opts.in_path.empty()
                               ? ctx.opts.in_path
                               : ctx.out_path("trajectories.jsonl").string();
    require_artifact(in, "trajectories", "synthesize");

    run_stage(ctx, "stats", {{in, ""}}, [&](json& extra) {
        const auto trajectories = read_trajectories_jsonl(in);
        const OutputStats stats = output_stats(trajectories);
        const json j{{"mean_reflections", stats.mean_reflections},
                     {"mean_searches", stats.mean_searches},
                     {"mean_length", stats.mean_length},
                     {"trajectories", trajectories.size()}};
        write_file_atomic(ctx.out_path("stats.json").string(), j.dump(2) + "\n");
        extra["trajectories"] = trajectories.size();
        std::cout << "stats: mean_reflections=" << stats.mean_reflections
                  << " mean_searches=" << stats.mean_searches
                  << " mean_length=" << stats.mean_length << "\n";
        return std::vector<std::string>{"stats.json"};
    });
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"deep-search trajectory synthesis, curation and export pipeline"};
    app.require_subcommand(1);

    CliOptions opts;
    app.add_option("--config", opts.config_file, "JSON configuration file");
    app.add_flag_callback("--mock", [&opts]() { opts.mode = "mock"; },
                          "scripted offline backends (default)");
    app.add_flag_callback("--live", [&opts]() { opts.mode = "live"; },
                          "HTTP backends from config/env");
    app.add_option("--replay", opts.replay_dir, "serve every backend call from this archive");
    app.add_option("--record", opts.record_dir, "record backend traffic into this archive");
    app.add_option("--out", opts.out_dir, "output directory");
    app.add_option("--cache", opts.cache_dir, "cache directory");
    app.add_option("--in", opts.in_path, "override the stage's input artifact");
    app.add_option("--search-fixture", opts.search_fixture,
                   "JSONL search fixture for mock mode");
    app.add_option("--llm-endpoint", opts.llm_endpoint, "chat-completion endpoint URL");
    app.add_option("--search-endpoint", opts.search_endpoint, "search provider endpoint URL");
    auto* seed_opt = app.add_option("--seed", opts.seed, "base sampling seed");
    app.add_option("--concurrency", opts.concurrency, "worker pool size");
    app.add_flag("--force", opts.force, "rerun even when outputs are up to date");

    auto* annotate = app.add_subcommand("annotate", "label queries with domain and keywords");
    annotate->add_option("--format", opts.corpus_format, "corpus format: jsonl or tsv")
        ->check(CLI::IsMember({"jsonl", "tsv"}));
    auto* sample = app.add_subcommand("sample", "diversity-aware query selection");
    sample->add_option("-n,--n", opts.sample_n, "number of queries to select")->required();
    auto* synthesize =
        app.add_subcommand("synthesize", "run the reason-search loop per query");
    auto* curate = app.add_subcommand("curate", "four-pillar response curation");
    curate->add_flag("--use-judge", opts.use_judge,
                     "use the LLM judge in the correctness oracle");
    auto* export_sft = app.add_subcommand("export-sft", "emit loss-masked SFT examples");
    auto* export_dpo = app.add_subcommand("export-dpo", "emit preference pairs");
    export_dpo->add_option("--strong", opts.strong_path, "strong-model trajectories JSONL");
    export_dpo->add_option("--weak", opts.weak_path, "target-model trajectories JSONL");
    auto* reward = app.add_subcommand("reward", "score trajectories for RL");
    auto* eval_cmd = app.add_subcommand("eval", "evaluation harness");
    eval_cmd->add_option("--metrics", opts.metrics, "subset of f1,judge,stats,stages");
    auto* stats = app.add_subcommand("stats", "output statistics");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        Context ctx;
        ctx.opts = opts;
        ctx.config = load_config(opts.config_file.empty()
                                     ? std::nullopt
                                     : std::optional<std::string>(opts.config_file));
        // CLI flags take precedence over env and file values.
        if (!opts.out_dir.empty()) ctx.config.paths.output_dir = opts.out_dir;
        if (!opts.cache_dir.empty()) ctx.config.paths.cache_dir = opts.cache_dir;
        if (!opts.llm_endpoint.empty()) ctx.config.gateways.llm_endpoint = opts.llm_endpoint;
        if (!opts.search_endpoint.empty())
            ctx.config.gateways.search_endpoint = opts.search_endpoint;
        if (seed_opt->count() > 0) ctx.config.seed = opts.seed;
        if (opts.concurrency > 0) ctx.config.concurrency = opts.concurrency;
        ctx.config.validate();

        ctx.mode = parse_mode(opts);
        ctx.backends = make_backends(ctx.config, ctx.mode, opts);

        if (annotate->parsed()) return cmd_annotate(ctx);
        if (sample->parsed()) return cmd_sample(ctx);
        if (synthesize->parsed()) return cmd_synthesize(ctx);
        if (curate->parsed()) return cmd_curate(ctx);
        if (export_sft->parsed()) return cmd_export_sft(ctx);
        if (export_dpo->parsed()) return cmd_export_dpo(ctx);
        if (reward->parsed()) return cmd_reward(ctx);
        if (eval_cmd->parsed()) return cmd_eval(ctx);
        if (stats->parsed()) return cmd_stats(ctx);
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DependencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDependency;
    } catch (const CacheMissError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const AnnotationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == AnnotationError::Code::backend_failure ? kExitBackend
                                                                  : kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace dsearch
