#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wikiref/corpus.hpp"
#include "wikiref/errors.hpp"
#include "wikiref/evaluate.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/textsim.hpp"
#include "wikiref/wikitext.hpp"

using namespace wikiref;

namespace {

// One qualifying evaluation target (Qt) among pages that each miss one
// requirement: Sp and Rp have no outlinks, Np has no references, Ep's only
// reference has an empty matching key.
struct EvalLand {
    Corpus corpus;
    EmbeddingProvider provider{"hand", 2};
    PipelineContext ctx;

    EvalLand() {
        corpus.add(extract_wikitext_page(
            "Qt",
            "Quiet start page.\n\nAlpha beta gamma [[Sp|and]] more. Delta epsilon "
            "[[Rp|and]] more. Claim words here.<ref>{{cite web|title=Gamma delta "
            "handbook|url=h}}</ref>\n"));
        corpus.add(extract_wikitext_page(
            "Sp",
            "Source top line.\n\nAlpha beta gamma delta epsilon.<ref>{{cite "
            "web|title=Gamma delta handbook|url=x}}</ref> Unrelated tail words.<ref>{{cite "
            "web|title=&&&|url=y}}</ref>\n"));
        corpus.add(extract_wikitext_page(
            "Rp", "Rp head.\n\nDelta epsilon words plain.<ref>{{cite web|title=Fresh angle "
                  "survey|url=f}}</ref>\n"));
        corpus.add(extract_wikitext_page("Np", "No refs page.\n\nLinks [[Qt]] plainly.\n"));
        corpus.add(extract_wikitext_page(
            "Ep", "Empty key page.\n\nPoints [[Qt]] there.<ref>{{cite "
                  "web|title=&&&|url=e}}</ref>\n"));
        provider.insert("alpha", DenseVector{{1.0, 0.0}});
        provider.insert("beta", DenseVector{{0.0, 1.0}});
        provider.insert("gamma", DenseVector{{1.0, 1.0}});
        provider.insert("delta", DenseVector{{2.0, 1.0}});
        provider.insert("epsilon", DenseVector{{1.0, 2.0}});
        ctx = build_context(corpus, provider);
    }
};

ForestModel always_relevant_forest() {
    TreeNode leaf;
    leaf.feature = TreeNode::kLeaf;
    leaf.p_relevant = 1.0;
    return ForestModel({DecisionTree{{leaf}}}, {}, 0);
}

Reference keyed_ref(const std::string& title) {
    Reference r;
    r.title = title;
    r.raw = title;
    r.norm_key = normalize_ref_title(title);
    return r;
}

std::vector<double> oracle_fractional_ranks(const std::vector<double>& values) {
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t greater = 0, equal = 0;
        for (double v : values) {
            if (v > values[i]) ++greater;
            if (v == values[i]) ++equal;
        }
        ranks[i] = static_cast<double>(greater) + (1.0 + static_cast<double>(equal)) / 2.0;
    }
    return ranks;
}

}  // namespace

TEST_SUITE("evaluate") {

TEST_CASE("gold reference keys are normalized, deduplicated and nonempty") {
    EvalLand land;
    auto gold = gold_references(land.corpus.at("Qt"));
    CHECK(gold == std::set<std::string>{"gamma delta handbook"});
    CHECK(gold_references(land.corpus.at("Np")).empty());
    CHECK(gold_references(land.corpus.at("Ep")).empty());  // only a punctuation key

    WikiPage dup;
    dup.title = "Dup";
    dup.references.push_back(keyed_ref("Shared Work"));
    dup.references.push_back(keyed_ref("shared  work."));
    CHECK(gold_references(dup) == std::set<std::string>{"shared work"});
}

TEST_CASE("candidate links keep first-mention order, dropping self and missing") {
    EvalLand land;
    WikiPage cc = extract_wikitext_page(
        "Cc", "Top.\n\nSee [[Rp]] here plus [[Sp]] and [[Rp]] again plus [[Cc]] self "
              "plus [[Missing]] gone.\n");
    auto links = candidate_links(cc, land.corpus);
    REQUIRE(links.size() == 2);
    CHECK(links[0]->title == "Rp");
    CHECK(links[1]->title == "Sp");
}

TEST_CASE("default targets require a keyed reference and an outgoing link") {
    EvalLand land;
    auto targets = default_eval_targets(land.corpus, land.ctx.graph);
    CHECK(targets == std::vector<std::string>{"Qt"});
}

TEST_CASE("splitting is a seeded permutation with a ceil train count") {
    std::vector<std::string> targets;
    for (int i = 0; i < 10; ++i) targets.push_back("t" + std::to_string(i));

    SplitResult r = split_corpus(targets, 0.7, 4);
    CHECK(r.train.size() == 7);
    CHECK(r.test.size() == 3);
    auto all = r.train;
    all.insert(all.end(), r.test.begin(), r.test.end());
    std::sort(all.begin(), all.end());
    auto expected = targets;
    std::sort(expected.begin(), expected.end());
    CHECK(all == expected);

    SplitResult again = split_corpus(targets, 0.7, 4);
    CHECK(again.train == r.train);
    CHECK(again.test == r.test);

    std::vector<std::string> five(targets.begin(), targets.begin() + 5);
    CHECK(split_corpus(five, 0.5, 1).train.size() == 3);  // ceil(2.5)
    std::vector<std::string> four(targets.begin(), targets.begin() + 4);
    CHECK(split_corpus(four, 0.5, 1).train.size() == 2);  // exact product stays put
}

TEST_CASE("splitting rejects degenerate inputs") {
    std::vector<std::string> one = {"solo"};
    CHECK_THROWS_AS(split_corpus(one, 0.5, 1), ConfigError);
    std::vector<std::string> two = {"a", "b"};
    CHECK_THROWS_AS(split_corpus(two, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_corpus(two, 1.0, 1), ConfigError);
}

TEST_CASE("every target lands in the test side at roughly the split rate") {
    std::vector<std::string> targets;
    for (int i = 0; i < 10; ++i) targets.push_back("t" + std::to_string(i));
    std::map<std::string, int> test_hits;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SplitResult r = split_corpus(targets, 0.7, seed);
        for (const auto& t : r.test) ++test_hits[t];
    }
    int total = 0;
    for (const auto& t : targets) {
        int hits = test_hits[t];
        total += hits;
        CHECK(hits >= 15);
        CHECK(hits <= 45);
    }
    CHECK(total == 300);  // 3 of 10 per seed, always
}

TEST_CASE("precision, recall and F at a cutoff match hand arithmetic") {
    std::set<std::string> gold = {"r1", "r2"};
    std::vector<std::string> ranked = {"r1", "x", "r2"};

    MetricsAtK m3 = precision_recall_f_at_k(ranked, gold, 3);
    CHECK(m3.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m3.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m3.f_measure == doctest::Approx(0.8).epsilon(1e-12));

    // The precision denominator is min(k, list length), not k.
    MetricsAtK m5 = precision_recall_f_at_k(ranked, gold, 5);
    CHECK(m5.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    MetricsAtK m1 = precision_recall_f_at_k(ranked, gold, 1);
    CHECK(m1.precision == 1.0);
    CHECK(m1.recall == 0.5);

    CHECK(precision_recall_f_at_k({}, gold, 3).precision == 0.0);
    CHECK(precision_recall_f_at_k({}, gold, 3).f_measure == 0.0);
    CHECK(precision_recall_f_at_k(ranked, {}, 3).recall == 0.0);
    CHECK_THROWS_AS(precision_recall_f_at_k(ranked, gold, 0), ConfigError);
}

TEST_CASE("cutoff metrics agree with a counting oracle on random instances") {
    Rng rng(606);
    std::vector<std::string> universe;
    for (int i = 0; i < 10; ++i) universe.push_back("k" + std::to_string(i));
    for (int trial = 0; trial < 50; ++trial) {
        auto pool = universe;
        rng.shuffle(pool);
        std::vector<std::string> ranked(pool.begin(),
                                        pool.begin() + 1 + rng.next_index(pool.size()));
        std::set<std::string> gold;
        for (const auto& key : universe) {
            if (rng.next_unit() < 0.4) gold.insert(key);
        }
        if (gold.empty()) gold.insert(universe[0]);
        std::size_t k = 1 + rng.next_index(12);

        std::size_t cut = std::min(k, ranked.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < cut; ++i) hits += gold.count(ranked[i]);
        double p = cut == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(cut);
        double r = static_cast<double>(hits) / static_cast<double>(gold.size());
        double f = (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);

        MetricsAtK m = precision_recall_f_at_k(ranked, gold, k);
        CHECK(m.precision == doctest::Approx(p).epsilon(1e-12));
        CHECK(m.recall == doctest::Approx(r).epsilon(1e-12));
        CHECK(m.f_measure == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("fractional ranks are 1-based with ties sharing the mean position") {
    CHECK(fractional_ranks({5.0, 3.0, 1.0}) == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(fractional_ranks({4.0, 4.0, 1.0}) == std::vector<double>{1.5, 1.5, 3.0});
    CHECK(fractional_ranks({2.0, 2.0, 2.0}) == std::vector<double>{2.0, 2.0, 2.0});
    CHECK(fractional_ranks({1.0, 9.0}) == std::vector<double>{2.0, 1.0});
    CHECK_THROWS_AS(fractional_ranks({}), ConfigError);

    Rng rng(515);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> values;
        for (int i = 0; i < 12; ++i) {
            values.push_back(static_cast<double>(rng.next_index(5)));  // force ties
        }
        CHECK(fractional_ranks(values) == oracle_fractional_ranks(values));
    }
}

TEST_CASE("rank correlation hits the textbook identities") {
    CHECK(spearman_rho({1, 2, 3, 4}, {1, 2, 3, 4}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spearman_rho({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(spearman_rho({2, 2, 2}, {1, 2, 3}) == 0.0);
    CHECK_THROWS_AS(spearman_rho({1, 2}, {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(spearman_rho({1}, {1}), ShapeError);

    // Tie block through fractional ranks: rho comes out at sqrt(0.9).
    auto ra = fractional_ranks({10.0, 8.0, 8.0, 2.0});
    auto rb = fractional_ranks({0.9, 0.7, 0.8, 0.1});
    CHECK(spearman_rho(ra, rb) == doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
}

TEST_CASE("votes parsing enforces the schema") {
    auto votes = parse_votes(
        R"({"T": [{"ref_key": "a", "votes": 3}, {"ref_key": "b", "votes": 1.5}]})");
    REQUIRE(votes.count("T") == 1);
    REQUIRE(votes["T"].size() == 2);
    CHECK(votes["T"][0].ref_key == "a");
    CHECK(votes["T"][1].votes == 1.5);

    CHECK_THROWS_AS(parse_votes("[1,2]"), SchemaError);
    CHECK_THROWS_AS(parse_votes("nope"), SchemaError);
    CHECK_THROWS_AS(parse_votes(R"({"T": [{"ref_key": "a", "votes": 1}]})"), SchemaError);
    CHECK_THROWS_AS(parse_votes(R"({"T": [{"ref_key": "a"}, {"ref_key": "b"}]})"),
                    SchemaError);
    CHECK_THROWS_AS(
        parse_votes(R"({"T": [{"ref_key": "", "votes": 1}, {"ref_key": "b", "votes": 1}]})"),
        SchemaError);
    CHECK_THROWS_AS(
        parse_votes(
            R"({"T": [{"ref_key": "a", "votes": -1}, {"ref_key": "b", "votes": 1}]})"),
        SchemaError);
}

TEST_CASE("system names round-trip and unknown names are rejected") {
    for (SystemId id : all_systems()) {
        auto back = system_from_name(system_name(id));
        REQUIRE(back.has_value());
        CHECK(*back == id);
    }
    CHECK(all_systems().size() == 6);
    CHECK(system_name(SystemId::BL1) == "BL-I");
    CHECK(system_name(SystemId::WikiRef) == "WikiRef");
    CHECK(!system_from_name("bl-i").has_value());
    CHECK(!system_from_name("baseline-1").has_value());
}

TEST_CASE("evaluation configs validate their knobs") {
    EvalConfig ok;
    CHECK_NOTHROW(ok.validate());

    EvalConfig bad = ok;
    bad.split_ratio = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.split_ratio = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.ks = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.ks = {1, 1, 2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.ks = {3, 2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.ks = {0, 1};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.systems = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("building a pipeline context rejects an empty corpus") {
    Corpus empty;
    EmbeddingProvider provider("hand", 2);
    CHECK_THROWS_AS(build_context(empty, provider), ConfigError);
}

TEST_CASE("job count does not change the fitted context") {
    EvalLand land;
    PipelineContext parallel = build_context(land.corpus, land.provider, 4);
    const WikiPage& qt = land.corpus.at("Qt");
    const WikiPage& sp = land.corpus.at("Sp");
    Step2Features a = step2_features(qt, sp, sp.references[0], land.ctx.idf, land.provider);
    Step2Features b = step2_features(qt, sp, sp.references[0], parallel.idf, land.provider);
    CHECK(a.f1_ti == b.f1_ti);
    CHECK(a.f2_ti == b.f2_ti);
    CHECK(parallel.graph.outlinks == land.ctx.graph.outlinks);
}

TEST_CASE("baselines score by their single feature over all candidate links") {
    EvalLand land;
    const WikiPage& qt = land.corpus.at("Qt");
    const WikiPage& sp = land.corpus.at("Sp");
    const WikiPage& rp = land.corpus.at("Rp");
    Step2Features f_sp =
        step2_features(qt, sp, sp.references[0], land.ctx.idf, land.provider);
    Step2Features f_rp =
        step2_features(qt, rp, rp.references[0], land.ctx.idf, land.provider);

    struct Case {
        SystemId id;
        double sp_score;
        double rp_score;
    };
    for (const Case& c : {Case{SystemId::BL1, f_sp.f1_ti, f_rp.f1_ti},
                          Case{SystemId::BL2, f_sp.f2_ti, f_rp.f2_ti}}) {
        CAPTURE(system_name(c.id));
        auto recs = run_system(c.id, qt, land.ctx, {},
                               RecommendOptions{.k = 5, .exclude_existing = false});
        REQUIRE(recs.size() == 2);  // the punctuation-keyed reference is dropped
        std::map<std::string, double> by_title;
        for (const auto& r : recs) by_title[r.reference.title] = r.score;
        CHECK(by_title.at("Gamma delta handbook") == doctest::Approx(c.sp_score).epsilon(1e-12));
        CHECK(by_title.at("Fresh angle survey") == doctest::Approx(c.rp_score).epsilon(1e-12));
        CHECK(recs[0].score >= recs[1].score);
    }
}

TEST_CASE("excluding existing references removes the target's own gold key") {
    EvalLand land;
    const WikiPage& qt = land.corpus.at("Qt");
    auto recs = run_system(SystemId::BL1, qt, land.ctx, {},
                           RecommendOptions{.k = 5, .exclude_existing = true});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].reference.title == "Fresh angle survey");
}

TEST_CASE("an all-relevant classifier makes the filtered baseline match the raw one") {
    EvalLand land;
    const WikiPage& qt = land.corpus.at("Qt");
    TrainedModels models;
    models.forest = always_relevant_forest();
    RecommendOptions options{.k = 5, .exclude_existing = false};

    std::vector<const WikiPage*> raw_links, filtered_links;
    auto raw = run_system(SystemId::BL1, qt, land.ctx, {}, options, &raw_links);
    auto filtered = run_system(SystemId::BL3, qt, land.ctx, models, options, &filtered_links);
    REQUIRE(raw.size() == filtered.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        CHECK(raw[i].reference.title == filtered[i].reference.title);
        CHECK(raw[i].score == filtered[i].score);
    }
    CHECK(raw_links.size() == filtered_links.size());
}

TEST_CASE("ranker-driven recommendation with unit weight equals the first baseline") {
    EvalLand land;
    const WikiPage& qt = land.corpus.at("Qt");
    TrainedModels models;
    models.forest = always_relevant_forest();
    models.ranker = RankerModel({1.0, 0.0, 0.0}, {}, 0);
    RecommendOptions options{.k = 5, .exclude_existing = false};

    auto wikiref = run_system(SystemId::WikiRef, qt, land.ctx, models, options);
    auto bl1 = run_system(SystemId::BL1, qt, land.ctx, {}, options);
    REQUIRE(wikiref.size() == bl1.size());
    for (std::size_t i = 0; i < wikiref.size(); ++i) {
        CHECK(wikiref[i].reference.title == bl1[i].reference.title);
        CHECK(wikiref[i].score == doctest::Approx(bl1[i].score).epsilon(1e-12));
    }
}

TEST_CASE("systems that filter or rank insist on trained models") {
    EvalLand land;
    const WikiPage& qt = land.corpus.at("Qt");
    CHECK_THROWS_AS(run_system(SystemId::BL3, qt, land.ctx, {}, {}), ConfigError);
    TrainedModels forest_only;
    forest_only.forest = always_relevant_forest();
    CHECK_THROWS_AS(run_system(SystemId::WikiRef, qt, land.ctx, forest_only, {}), ConfigError);
}

TEST_CASE("report files round-trip through their JSON form") {
    EvalOutcome outcome;
    outcome.train_targets = {"A", "B"};
    outcome.test_targets = {"C"};
    outcome.step1.examples = 8;
    outcome.step1.tp = 3;
    outcome.step1.fp = 1;
    outcome.step1.fn = 1;
    outcome.step1.tn = 3;
    outcome.step1.precision = 0.75;
    outcome.step1.recall = 0.75;
    outcome.step1.f_measure = 0.75;
    outcome.step1.precision_irrelevant = 0.75;
    outcome.step1.recall_irrelevant = 0.75;
    outcome.step1.f_irrelevant = 0.75;
    for (std::size_t i = 0; i < Step1Features::kCount; ++i) {
        ChiSquareEntry e;
        e.feature_index = i;
        e.feature_name = Step1Features::names()[i];
        e.score = 8.0 - static_cast<double>(i);
        outcome.chi_order.push_back(e);
    }
    SystemEval sys;
    sys.id = SystemId::WikiRef;
    sys.at_k = {KRow{1, 1.0, 0.25, 0.4, 0.5}, KRow{5, 0.5, 0.625, 0.5555555555555556, 0.75}};
    sys.targets_with_candidates = 1;
    sys.at_k_with_candidates = sys.at_k;
    outcome.systems.push_back(sys);
    outcome.per_target.push_back(PerTargetRow{"WikiRef", "C", 1, 1.0, 0.25, 0.4});
    SpearmanEval sp;
    sp.targets = 2;
    sp.per_system["WikiRef"] = 0.5;
    sp.per_system["BL-I"] = 0.25;
    outcome.spearman = sp;

    ReportMeta meta;
    meta.master_seed = 42;
    meta.config_digest = "cfg123";
    meta.corpus_digest = "corp456";
    meta.pages = 5;
    meta.embedding_name = "hand";
    meta.embedding_dim = 2;

    std::string json = report_to_json(outcome, meta);
    auto [back, back_meta] = report_from_json(json);
    CHECK(report_to_json(back, back_meta) == json);
    CHECK(back.test_targets == outcome.test_targets);
    CHECK(back.systems.size() == 1);
    CHECK(back.systems[0].at_k.size() == 2);
    CHECK(back.systems[0].at_k[1].recall_reachable == 0.75);
    REQUIRE(back.spearman.has_value());
    CHECK(back.spearman->per_system.at("BL-I") == 0.25);

    std::string md = report_to_markdown(outcome, meta);
    CHECK(md.find("WikiRef") != std::string::npos);
    CHECK(md.find("k = 1") != std::string::npos);
    CHECK(md.find("Correlation with human ranking") != std::string::npos);

    std::string csv = per_target_csv(outcome);
    CHECK(csv.rfind("system,target,k,precision,recall,f_measure\n", 0) == 0);
    CHECK(csv.find("WikiRef,C,1,") != std::string::npos);

    CHECK_THROWS_AS(report_from_json("not json"), SchemaError);
    CHECK_THROWS_AS(report_from_json("{}"), SchemaError);
}

}  // TEST_SUITE
