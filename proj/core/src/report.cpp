#include <cstdio>

#include <nlohmann/json.hpp>

#include "wikiref/errors.hpp"
#include "wikiref/evaluate.hpp"
#include "wikiref/util.hpp"
#include "wikiref/version.hpp"

namespace wikiref {

namespace {

using ordered_json = nlohmann::ordered_json;

// Fixed-scale results observed on the original full-size Wikipedia
// corpora. The bundled corpora are tiny fixtures, so these numbers are
// context for the reader, never targets for the run.
ordered_json reference_results() {
    ordered_json at_k = ordered_json::array();
    auto row = [](int k, double p, double r, double f) {
        ordered_json j;
        j["k"] = k;
        j["precision"] = p;
        j["recall"] = r;
        j["f_measure"] = f;
        return j;
    };

    ordered_json cs;
    cs["scale"] = {{"target_pages", 3842}, {"corpus_pages", 121154}};
    cs["step1"] = {{"precision", 0.50}, {"recall", 0.45}, {"f_measure", 0.42}};
    at_k.push_back(row(1, 0.44, 0.21, 0.28));
    at_k.push_back(row(2, 0.41, 0.23, 0.30));
    at_k.push_back(row(3, 0.40, 0.26, 0.30));
    at_k.push_back(row(4, 0.37, 0.27, 0.31));
    at_k.push_back(row(5, 0.34, 0.30, 0.31));
    at_k.push_back(row(10, 0.25, 0.35, 0.30));
    cs["wikiref_at_k"] = std::move(at_k);
    cs["precision_at_1"] = {{"BL-I", 0.22}, {"BL-II", 0.15}, {"BL-III", 0.38},
                            {"BL-IV", 0.31}, {"BL-V", 0.36}, {"WikiRef", 0.44}};
    cs["average_rho"] = {{"BL-I", 0.099}, {"BL-II", 0.16}, {"BL-III", 0.089},
                         {"BL-IV", 0.168}, {"BL-V", 0.104}, {"WikiRef", 0.203}};

    ordered_json ph;
    ph["scale"] = {{"target_pages", 2871}, {"corpus_pages", 107332}};
    ph["step1"] = {{"precision", 0.41}, {"recall", 0.44}, {"f_measure", 0.37}};
    ordered_json ph_k = ordered_json::array();
    ph_k.push_back(row(1, 0.45, 0.10, 0.16));
    ph_k.push_back(row(2, 0.41, 0.13, 0.19));
    ph_k.push_back(row(3, 0.38, 0.16, 0.18));
    ph_k.push_back(row(4, 0.35, 0.20, 0.25));
    ph_k.push_back(row(5, 0.32, 0.22, 0.23));
    ph_k.push_back(row(10, 0.30, 0.25, 0.26));
    ph["wikiref_at_k"] = std::move(ph_k);
    ph["precision_at_1"] = {{"BL-I", 0.20}, {"BL-II", 0.24}, {"BL-III", 0.36},
                            {"BL-IV", 0.36}, {"BL-V", 0.41}, {"WikiRef", 0.45}};

    ordered_json j;
    j["note"] =
        "Numbers reported for the original full-scale Wikipedia corpora. "
        "The bundled corpora are small fixtures; treat these as context, "
        "not as expected output.";
    j["computer_science"] = std::move(cs);
    j["physics"] = std::move(ph);
    return j;
}

ordered_json k_rows_json(const std::vector<KRow>& rows) {
    ordered_json out = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json j;
        j["k"] = row.k;
        j["precision"] = row.precision;
        j["recall"] = row.recall;
        j["f_measure"] = row.f_measure;
        j["recall_reachable"] = row.recall_reachable;
        out.push_back(std::move(j));
    }
    return out;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

const SystemEval* find_system(const EvalOutcome& outcome, SystemId id) {
    for (const auto& sys : outcome.systems) {
        if (sys.id == id) return &sys;
    }
    return nullptr;
}

}  // namespace

std::string report_to_json(const EvalOutcome& outcome, const ReportMeta& meta) {
    ordered_json j;
    j["artifact"] = {{"name", "wikiref"}, {"version", kArtifactVersion}};

    ordered_json m;
    m["master_seed"] = meta.master_seed;
    m["config_digest"] = meta.config_digest;
    m["corpus_digest"] = meta.corpus_digest;
    m["pages"] = meta.pages;
    m["canonicalization_version"] = kCanonicalizationVersion;
    m["stopword_list_version"] = kStopwordListVersion;
    m["embedding"] = {{"name", meta.embedding_name}, {"dim", meta.embedding_dim}};
    m["train_targets"] = outcome.train_targets.size();
    m["test_targets"] = outcome.test_targets.size();
    j["meta"] = std::move(m);

    j["reference_results"] = reference_results();

    j["split"] = {{"train", outcome.train_targets}, {"test", outcome.test_targets}};

    ordered_json s1;
    s1["examples"] = outcome.step1.examples;
    s1["confusion"] = {{"tp", outcome.step1.tp},
                       {"fp", outcome.step1.fp},
                       {"fn", outcome.step1.fn},
                       {"tn", outcome.step1.tn}};
    s1["relevant"] = {{"precision", outcome.step1.precision},
                      {"recall", outcome.step1.recall},
                      {"f_measure", outcome.step1.f_measure}};
    s1["irrelevant"] = {{"precision", outcome.step1.precision_irrelevant},
                        {"recall", outcome.step1.recall_irrelevant},
                        {"f_measure", outcome.step1.f_irrelevant}};
    j["step1"] = std::move(s1);

    ordered_json chi = ordered_json::array();
    for (std::size_t i = 0; i < outcome.chi_order.size(); ++i) {
        const auto& entry = outcome.chi_order[i];
        ordered_json e;
        e["rank"] = i + 1;
        e["feature"] = entry.feature_name;
        e["index"] = entry.feature_index;
        e["score"] = entry.score;
        chi.push_back(std::move(e));
    }
    j["chi_square"] = std::move(chi);

    ordered_json systems;
    for (const auto& sys : outcome.systems) {
        ordered_json s;
        s["targets"] = outcome.test_targets.size();
        s["at_k"] = k_rows_json(sys.at_k);
        s["targets_with_candidates"] = sys.targets_with_candidates;
        s["at_k_with_candidates"] = k_rows_json(sys.at_k_with_candidates);
        systems[std::string(system_name(sys.id))] = std::move(s);
    }
    j["systems"] = std::move(systems);

    if (outcome.spearman.has_value()) {
        ordered_json sp;
        sp["targets"] = outcome.spearman->targets;
        ordered_json per;
        for (const auto& [name, rho] : outcome.spearman->per_system) per[name] = rho;
        sp["average_rho"] = std::move(per);
        j["spearman"] = std::move(sp);
    } else {
        j["spearman"] = nullptr;
    }

    ordered_json per_target = ordered_json::array();
    for (const auto& row : outcome.per_target) {
        per_target.push_back({row.system, row.target, row.k, row.precision, row.recall,
                              row.f_measure});
    }
    j["per_target"] = std::move(per_target);
    return j.dump(2) + "\n";
}

std::pair<EvalOutcome, ReportMeta> report_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report: invalid JSON: ") + e.what());
    }
    try {
        EvalOutcome outcome;
        ReportMeta meta;
        const auto& m = j.at("meta");
        meta.master_seed = m.at("master_seed").get<std::uint64_t>();
        meta.config_digest = m.at("config_digest").get<std::string>();
        meta.corpus_digest = m.at("corpus_digest").get<std::string>();
        meta.pages = m.at("pages").get<std::size_t>();
        meta.embedding_name = m.at("embedding").at("name").get<std::string>();
        meta.embedding_dim = m.at("embedding").at("dim").get<std::size_t>();

        const auto& split = j.at("split");
        outcome.train_targets = split.at("train").get<std::vector<std::string>>();
        outcome.test_targets = split.at("test").get<std::vector<std::string>>();

        const auto& s1 = j.at("step1");
        outcome.step1.examples = s1.at("examples").get<std::size_t>();
        outcome.step1.tp = s1.at("confusion").at("tp").get<std::size_t>();
        outcome.step1.fp = s1.at("confusion").at("fp").get<std::size_t>();
        outcome.step1.fn = s1.at("confusion").at("fn").get<std::size_t>();
        outcome.step1.tn = s1.at("confusion").at("tn").get<std::size_t>();
        outcome.step1.precision = s1.at("relevant").at("precision").get<double>();
        outcome.step1.recall = s1.at("relevant").at("recall").get<double>();
        outcome.step1.f_measure = s1.at("relevant").at("f_measure").get<double>();
        outcome.step1.precision_irrelevant = s1.at("irrelevant").at("precision").get<double>();
        outcome.step1.recall_irrelevant = s1.at("irrelevant").at("recall").get<double>();
        outcome.step1.f_irrelevant = s1.at("irrelevant").at("f_measure").get<double>();

        for (const auto& e : j.at("chi_square")) {
            ChiSquareEntry entry;
            entry.feature_index = e.at("index").get<std::size_t>();
            entry.feature_name = e.at("feature").get<std::string>();
            entry.score = e.at("score").get<double>();
            outcome.chi_order.push_back(std::move(entry));
        }

        auto parse_rows = [](const ordered_json& rows) {
            std::vector<KRow> out;
            for (const auto& r : rows) {
                KRow row;
                row.k = r.at("k").get<std::size_t>();
                row.precision = r.at("precision").get<double>();
                row.recall = r.at("recall").get<double>();
                row.f_measure = r.at("f_measure").get<double>();
                row.recall_reachable = r.at("recall_reachable").get<double>();
                out.push_back(row);
            }
            return out;
        };
        // Iterate canonical order; stored keys are a subset of it.
        for (SystemId id : all_systems()) {
            auto key = std::string(system_name(id));
            if (!j.at("systems").contains(key)) continue;
            const auto& s = j.at("systems").at(key);
            SystemEval sys;
            sys.id = id;
            sys.at_k = parse_rows(s.at("at_k"));
            sys.targets_with_candidates = s.at("targets_with_candidates").get<std::size_t>();
            sys.at_k_with_candidates = parse_rows(s.at("at_k_with_candidates"));
            outcome.systems.push_back(std::move(sys));
        }

        if (!j.at("spearman").is_null()) {
            SpearmanEval sp;
            sp.targets = j.at("spearman").at("targets").get<std::size_t>();
            for (const auto& [name, rho] : j.at("spearman").at("average_rho").items()) {
                sp.per_system[name] = rho.get<double>();
            }
            outcome.spearman = std::move(sp);
        }

        for (const auto& r : j.at("per_target")) {
            if (!r.is_array() || r.size() != 6) {
                throw SchemaError("report: malformed per_target row");
            }
            PerTargetRow row;
            row.system = r[0].get<std::string>();
            row.target = r[1].get<std::string>();
            row.k = r[2].get<std::size_t>();
            row.precision = r[3].get<double>();
            row.recall = r[4].get<double>();
            row.f_measure = r[5].get<double>();
            outcome.per_target.push_back(std::move(row));
        }
        return {std::move(outcome), std::move(meta)};
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report: ") + e.what());
    }
}

std::string report_to_markdown(const EvalOutcome& outcome, const ReportMeta& meta) {
    std::string md;
    md += "# Reference recommendation evaluation\n\n";
    md += "- master seed: " + std::to_string(meta.master_seed) + "\n";
    md += "- corpus digest: " + meta.corpus_digest + " (" + std::to_string(meta.pages) +
          " pages)\n";
    md += "- config digest: " + meta.config_digest + "\n";
    md += "- embedding: " + meta.embedding_name + " (dim " +
          std::to_string(meta.embedding_dim) + ")\n";
    md += "- targets: " + std::to_string(outcome.train_targets.size()) + " train / " +
          std::to_string(outcome.test_targets.size()) + " test\n\n";

    md += "## Step I: wikilink classification (test split, " +
          std::to_string(outcome.step1.examples) + " wikilinks)\n\n";
    md += "| class | precision | recall | f-measure |\n";
    md += "|---|---|---|---|\n";
    md += "| relevant | " + fixed4(outcome.step1.precision) + " | " +
          fixed4(outcome.step1.recall) + " | " + fixed4(outcome.step1.f_measure) + " |\n";
    md += "| irrelevant | " + fixed4(outcome.step1.precision_irrelevant) + " | " +
          fixed4(outcome.step1.recall_irrelevant) + " | " +
          fixed4(outcome.step1.f_irrelevant) + " |\n\n";

    md += "## Feature ranking (chi-square)\n\n";
    md += "| rank | feature | score |\n";
    md += "|---|---|---|\n";
    for (std::size_t i = 0; i < outcome.chi_order.size(); ++i) {
        md += "| " + std::to_string(i + 1) + " | " + outcome.chi_order[i].feature_name +
              " | " + fixed4(outcome.chi_order[i].score) + " |\n";
    }
    md += "\n";

    if (const SystemEval* wikiref = find_system(outcome, SystemId::WikiRef)) {
        md += "## WikiRef recommendation quality by cutoff\n\n";
        md += "| k | precision | recall | f-measure |\n";
        md += "|---|---|---|---|\n";
        for (const auto& row : wikiref->at_k) {
            md += "| " + std::to_string(row.k) + " | " + fixed4(row.precision) + " | " +
                  fixed4(row.recall) + " | " + fixed4(row.f_measure) + " |\n";
        }
        md += "\n";
    }

    if (!outcome.systems.empty()) {
        const auto& ks = outcome.systems.front().at_k;
        if (!ks.empty()) {
            std::size_t k1 = ks.front().k;
            md += "## System comparison at k = " + std::to_string(k1) + "\n\n";
            md += "| system | precision | recall | f-measure |\n";
            md += "|---|---|---|---|\n";
            for (const auto& sys : outcome.systems) {
                const KRow& row = sys.at_k.front();
                md += "| " + std::string(system_name(sys.id)) + " | " +
                      fixed4(row.precision) + " | " + fixed4(row.recall) + " | " +
                      fixed4(row.f_measure) + " |\n";
            }
            md += "\n";

            md += "## Precision by cutoff\n\n";
            md += "| system |";
            for (const auto& row : ks) md += " p@" + std::to_string(row.k) + " |";
            md += "\n|---|";
            for (std::size_t i = 0; i < ks.size(); ++i) md += "---|";
            md += "\n";
            for (const auto& sys : outcome.systems) {
                md += "| " + std::string(system_name(sys.id)) + " |";
                for (const auto& row : sys.at_k) md += " " + fixed4(row.precision) + " |";
                md += "\n";
            }
            md += "\n";
        }
    }

    if (outcome.spearman.has_value()) {
        md += "## Correlation with human ranking (" +
              std::to_string(outcome.spearman->targets) + " targets)\n\n";
        md += "| system | average rho |\n";
        md += "|---|---|\n";
        for (const auto& [name, rho] : outcome.spearman->per_system) {
            md += "| " + name + " | " + fixed4(rho) + " |\n";
        }
        md += "\n";
    }
    return md;
}

std::string per_target_csv(const EvalOutcome& outcome) {
    std::string csv = "system,target,k,precision,recall,f_measure\n";
    for (const auto& row : outcome.per_target) {
        csv += csv_escape(row.system);
        csv.push_back(',');
        csv += csv_escape(row.target);
        csv.push_back(',');
        csv += std::to_string(row.k);
        csv.push_back(',');
        csv += format_double(row.precision);
        csv.push_back(',');
        csv += format_double(row.recall);
        csv.push_back(',');
        csv += format_double(row.f_measure);
        csv.push_back('\n');
    }
    return csv;
}

}  // namespace wikiref
