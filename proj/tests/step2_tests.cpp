#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wikiref/corpus.hpp"
#include "wikiref/errors.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/step2.hpp"
#include "wikiref/textsim.hpp"
#include "wikiref/wikitext.hpp"

using namespace wikiref;

namespace {

// Target, source and an equal-weight idf table. Piped link displays are
// stopwords so anchors never add content tokens; the source's first
// citation sentence carries exactly the mention-context token multiset.
struct RefLand {
    WikiPage qt = extract_wikitext_page(
        "Qt",
        "Quiet start page.\n\nAlpha beta gamma [[Sp|and]] more. Middle words plain. "
        "Delta epsilon [[Sp|and]] more.\n");
    WikiPage sp = extract_wikitext_page(
        "Sp",
        "Source top line.\n\nAlpha beta gamma delta epsilon.<ref>{{cite web|title=Gamma "
        "delta handbook|url=x}}</ref> Unrelated tail words.<ref>{{cite "
        "web|title=&&&|url=y}}</ref>\n");
    IdfTable idf = fit_idf({{"alpha"}, {"beta"}, {"gamma"}, {"delta"}, {"epsilon"},
                            {"handbook"}});
    EmbeddingProvider provider{"hand", 2};

    RefLand() {
        provider.insert("alpha", DenseVector{{1.0, 0.0}});
        provider.insert("beta", DenseVector{{0.0, 1.0}});
        provider.insert("gamma", DenseVector{{1.0, 1.0}});
        provider.insert("delta", DenseVector{{2.0, 1.0}});
        provider.insert("epsilon", DenseVector{{1.0, 2.0}});
    }
};

Reference make_ref(const std::string& title) {
    Reference r;
    r.title = title;
    r.raw = title;
    r.norm_key = normalize_ref_title(title);
    return r;
}

WikiPage make_source(const std::string& title, const std::vector<std::string>& ref_titles) {
    WikiPage p;
    p.title = title;
    for (const auto& t : ref_titles) p.references.push_back(make_ref(t));
    return p;
}

// Scores by reference title; unknown titles get 0.
ReferenceScorer table_scorer(std::map<std::string, double> table) {
    return [table = std::move(table)](const WikiPage&, const Reference& ref) {
        auto it = table.find(ref.title);
        return it == table.end() ? 0.0 : it->second;
    };
}

Step2Features feat(double a, double b, double c) {
    Step2Features f;
    f.f1_ti = a;
    f.f1_vec = b;
    f.f2_ti = c;
    return f;
}

QueryItem item(double a, double b, double c, bool gold) {
    return QueryItem{feat(a, b, c), gold};
}

}  // namespace

TEST_SUITE("step2") {

TEST_CASE("matching citation sentence pins the context features to one") {
    RefLand land;
    REQUIRE(land.sp.references.size() == 2);
    Step2Features f =
        step2_features(land.qt, land.sp, land.sp.references[0], land.idf, land.provider);
    // Mention context {alpha,beta,gamma,delta,epsilon} equals the citation
    // sentence token multiset, so both text channels saturate.
    CHECK(f.f1_ti == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.f1_vec == doctest::Approx(1.0).epsilon(1e-12));
    // Title {gamma,delta,handbook} against the five mention tokens, all
    // idf weights equal: 2 / sqrt(3 * 5).
    CHECK(f.f2_ti == doctest::Approx(2.0 / std::sqrt(15.0)).epsilon(1e-12));
}

TEST_CASE("punctuation-only reference title zeroes the title feature") {
    RefLand land;
    Step2Features f =
        step2_features(land.qt, land.sp, land.sp.references[1], land.idf, land.provider);
    CHECK(f.f2_ti == 0.0);
    CHECK(f.f1_ti == 0.0);  // citation sentence shares no mention token
}

TEST_CASE("repeat anchors inside one sentence count that sentence once") {
    WikiPage target = extract_wikitext_page(
        "Tw", "Top.\n\nAlpha [[Sq|and]] alpha [[Sq|and]] more. Filler plain words. Beta "
              "[[Sq|and]] more.\n");
    WikiPage source = extract_wikitext_page(
        "Sq", "Src head.\n\nGamma words plain.<ref>{{cite web|title=Alpha beta "
              "handbook|url=z}}</ref>\n");
    RefLand land;
    Step2Features f =
        step2_features(target, source, source.references[0], land.idf, land.provider);
    // Mention context is {alpha x2, beta}; a double-counted first sentence
    // would give 5/sqrt(51) instead.
    CHECK(f.f2_ti == doctest::Approx(3.0 / std::sqrt(15.0)).epsilon(1e-12));
}

TEST_CASE("anchor without a sentence gives an all-zero vector") {
    RefLand land;
    WikiPage bare;
    bare.title = "Bare";
    bare.wikilinks.push_back({"Sp", std::nullopt});
    Step2Features f =
        step2_features(bare, land.sp, land.sp.references[0], land.idf, land.provider);
    CHECK(f.f1_ti == 0.0);
    CHECK(f.f1_vec == 0.0);
    CHECK(f.f2_ti == 0.0);
}

TEST_CASE("feature extraction enforces ownership") {
    RefLand land;
    WikiPage lone = extract_wikitext_page(
        "Lone", "Alone here.<ref>{{cite web|title=Lone ref|url=q}}</ref>\n");
    CHECK_THROWS_AS(
        step2_features(land.qt, lone, lone.references[0], land.idf, land.provider),
        OwnershipError);

    Reference foreign = make_ref("Not on sp");
    foreign.sentence_index = 0;
    CHECK_THROWS_AS(step2_features(land.qt, land.sp, foreign, land.idf, land.provider),
                    OwnershipError);
}

TEST_CASE("pairwise construction crosses every positive with every negative") {
    std::vector<std::vector<QueryItem>> queries;
    queries.push_back({item(0.9, 0.8, 0.7, true), item(0.6, 0.5, 0.4, true),
                       item(0.1, 0.2, 0.3, false), item(0.0, 0.0, 0.0, false),
                       item(0.2, 0.1, 0.0, false)});
    PairwiseStats stats;
    auto pairs = build_pairwise_training(queries, &stats);
    CHECK(stats.queries_used == 1);
    CHECK(stats.queries_skipped == 0);
    CHECK(stats.pairs == 6);
    REQUIRE(pairs.size() == 6);
    // First pair: first positive minus first negative.
    CHECK(pairs[0][0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(pairs[0][1] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(pairs[0][2] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("queries lacking a class are skipped, and pairs never cross queries") {
    std::vector<std::vector<QueryItem>> queries;
    queries.push_back({item(1, 1, 1, true)});                         // no negative
    queries.push_back({item(0, 0, 0, false), item(0.1, 0, 0, false)});  // no positive
    queries.push_back({item(0.9, 0, 0, true), item(0.1, 0, 0, false)});
    queries.push_back({item(0.8, 0, 0, true), item(0.2, 0, 0, false)});
    PairwiseStats stats;
    auto pairs = build_pairwise_training(queries, &stats);
    CHECK(stats.queries_used == 2);
    CHECK(stats.queries_skipped == 2);
    CHECK(pairs.size() == 2);  // 1x1 within each usable query
}

TEST_CASE("training on one repeated direction moves only that weight") {
    std::vector<PairDiff> pairs(40, PairDiff{1.0, 0.0, 0.0});
    RankerModel model = train_ranker(pairs, RankerParams{.C = 1.0, .epochs = 50}, 3);
    CHECK(model.weights()[0] > 0.0);
    CHECK(model.weights()[1] == 0.0);
    CHECK(model.weights()[2] == 0.0);
    CHECK(score(model, feat(1.0, 5.0, 5.0)) == model.weights()[0]);
}

TEST_CASE("trained ranker agrees with the teacher ordering") {
    const std::array<double, 3> teacher = {0.8, 0.15, 0.05};
    Rng rng(909);
    std::vector<PairDiff> pairs;
    while (pairs.size() < 200) {
        PairDiff d;
        for (double& v : d) v = 2.0 * rng.next_unit() - 1.0;
        double m = teacher[0] * d[0] + teacher[1] * d[1] + teacher[2] * d[2];
        if (std::fabs(m) < 0.05) continue;  // drop near-ties the teacher barely orders
        if (m < 0.0) for (double& v : d) v = -v;
        pairs.push_back(d);
    }
    RankerModel model = train_ranker(pairs, RankerParams{.C = 10.0, .epochs = 100}, 7);
    std::size_t agree = 0;
    for (const auto& d : pairs) {
        const auto& w = model.weights();
        if (w[0] * d[0] + w[1] * d[1] + w[2] * d[2] > 0.0) ++agree;
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(pairs.size()) >= 0.95);
}

TEST_CASE("ranker training is seed-deterministic") {
    Rng rng(11);
    std::vector<PairDiff> pairs;
    for (int i = 0; i < 60; ++i) {
        PairDiff d;
        for (double& v : d) v = rng.next_gaussian();
        pairs.push_back(d);
    }
    RankerModel a = train_ranker(pairs, {}, 42);
    RankerModel b = train_ranker(pairs, {}, 42);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.weights() == b.weights());
}

TEST_CASE("ranker rejects unusable inputs") {
    CHECK_THROWS_AS(train_ranker({}, {}, 1), TrainingError);
    std::vector<PairDiff> pairs(3, PairDiff{0.5, 0.0, 0.0});
    CHECK_THROWS_AS(train_ranker(pairs, RankerParams{.C = 0.0, .epochs = 10}, 1), ConfigError);
    CHECK_THROWS_AS(train_ranker(pairs, RankerParams{.C = -2.0, .epochs = 10}, 1), ConfigError);
    CHECK_THROWS_AS(train_ranker(pairs, RankerParams{.C = 1.0, .epochs = 0}, 1), ConfigError);
    CHECK_THROWS_AS(score(RankerModel{}, feat(1, 1, 1)), ConfigError);
}

TEST_CASE("scoring is the plain weighted sum") {
    RankerModel model({2.0, 0.0, 0.0}, {}, 0);
    CHECK(score(model, feat(0.5, 1.0, 1.0)) == 1.0);
    CHECK(score(model, feat(0.0, 9.0, 9.0)) == 0.0);

    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
        std::array<double, 3> w = {rng.next_gaussian(), rng.next_gaussian(),
                                   rng.next_gaussian()};
        Step2Features f = feat(rng.next_unit(), rng.next_unit(), rng.next_unit());
        RankerModel m(w, {}, 0);
        auto x = f.values();
        double expected = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
        CHECK(score(m, f) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("ranker model files round-trip") {
    RankerModel model({0.25, -1.5, 3.125}, RankerParams{.C = 2.5, .epochs = 7}, 99);
    auto path = std::filesystem::temp_directory_path() / "wikiref_ranker_test.json";
    model.save(path);
    RankerModel back = RankerModel::load(path);
    CHECK(back.weights() == model.weights());
    CHECK(back.params().C == model.params().C);
    CHECK(back.params().epochs == model.params().epochs);
    CHECK(back.seed() == model.seed());
    CHECK(back.serialize() == model.serialize());
    std::filesystem::remove(path);
}

TEST_CASE("ranker model parsing rejects malformed input") {
    CHECK_THROWS_AS(RankerModel::deserialize("not json"), SchemaError);
    CHECK_THROWS_AS(RankerModel::deserialize(R"({"format":"other"})"), SchemaError);
    CHECK_THROWS_AS(RankerModel::deserialize(
                        R"({"format":"wikiref.ranker.v1","artifact_version":"x",)"
                        R"("seed":0,"params":{"C":1.0,"epochs":1},"weights":[1.0,2.0]})"),
                    SchemaError);
}

TEST_CASE("pooling with no links yields nothing") {
    WikiPage target = make_source("T", {});
    auto recs = rank_references(target, {}, table_scorer({}), {});
    CHECK(recs.empty());
}

TEST_CASE("pooling orders by score and assigns consecutive ranks") {
    WikiPage target = make_source("T", {});
    WikiPage a = make_source("A", {"Low card", "High card"});
    auto recs = rank_references(target, {&a},
                                table_scorer({{"Low card", 0.2}, {"High card", 0.8}}),
                                RecommendOptions{.k = 5});
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].reference.title == "High card");
    CHECK(recs[0].rank == 1);
    CHECK(recs[0].score == 0.8);
    CHECK(recs[0].source_wikilink == "A");
    CHECK(recs[1].reference.title == "Low card");
    CHECK(recs[1].rank == 2);
}

TEST_CASE("duplicate keys keep the single highest-scoring copy") {
    WikiPage target = make_source("T", {});
    WikiPage a = make_source("A", {"Shared Work"});
    WikiPage b = make_source("B", {"shared  work."});
    REQUIRE(a.references[0].norm_key == b.references[0].norm_key);
    auto recs = rank_references(
        target, {&a, &b},
        table_scorer({{"Shared Work", 0.4}, {"shared  work.", 0.9}}),
        RecommendOptions{.k = 5});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].reference.title == "shared  work.");
    CHECK(recs[0].score == 0.9);
    CHECK(recs[0].source_wikilink == "B");
}

TEST_CASE("score ties fall back to link order then reference order") {
    WikiPage target = make_source("T", {});
    WikiPage a = make_source("A", {"First", "Second"});
    WikiPage b = make_source("B", {"Third"});
    auto recs = rank_references(
        target, {&a, &b},
        table_scorer({{"First", 0.5}, {"Second", 0.5}, {"Third", 0.5}}),
        RecommendOptions{.k = 5});
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].reference.title == "First");
    CHECK(recs[1].reference.title == "Second");
    CHECK(recs[2].reference.title == "Third");
    CHECK(recs[2].rank == 3);
}

TEST_CASE("existing and unkeyed references are dropped from the pool") {
    WikiPage target = make_source("T", {"Gamma delta handbook"});
    WikiPage a = make_source("A", {"Gamma delta handbook", "Fresh title", "&&&"});
    auto scorer = table_scorer(
        {{"Gamma delta handbook", 0.9}, {"Fresh title", 0.5}, {"&&&", 0.99}});

    auto kept = rank_references(target, {&a}, scorer,
                                RecommendOptions{.k = 5, .exclude_existing = true});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].reference.title == "Fresh title");

    auto all = rank_references(target, {&a}, scorer,
                               RecommendOptions{.k = 5, .exclude_existing = false});
    REQUIRE(all.size() == 2);  // the punctuation-only key stays out either way
    CHECK(all[0].reference.title == "Gamma delta handbook");
}

TEST_CASE("per-link mode truncates inside each link and skips the global cut") {
    WikiPage target = make_source("T", {});
    WikiPage a = make_source("A", {"K1", "K2", "K3"});
    WikiPage b = make_source("B", {"K3"});
    auto scorer = [](const WikiPage& source, const Reference& ref) {
        if (ref.title == "K1") return 1.0;
        if (ref.title == "K2") return 0.9;
        return source.title == "A" ? 0.8 : 0.5;  // K3 scores differ per link
    };

    auto global = rank_references(target, {&a, &b}, scorer,
                                  RecommendOptions{.k = 2, .per_link = false});
    REQUIRE(global.size() == 2);
    CHECK(global[0].reference.title == "K1");
    CHECK(global[1].reference.title == "K2");

    // A's K3 copy is cut by the per-link top-2, so B's lower-scored copy
    // survives dedup and the merged list exceeds k.
    auto local = rank_references(target, {&a, &b}, scorer,
                                 RecommendOptions{.k = 2, .per_link = true});
    REQUIRE(local.size() == 3);
    CHECK(local[2].reference.title == "K3");
    CHECK(local[2].score == 0.5);
    CHECK(local[2].source_wikilink == "B");
}

TEST_CASE("cutoff zero is rejected") {
    WikiPage target = make_source("T", {});
    CHECK_THROWS_AS(rank_references(target, {}, table_scorer({}), RecommendOptions{.k = 0}),
                    ConfigError);
}

TEST_CASE("ordering is invariant under positive weight scaling") {
    WikiPage target = make_source("T", {});
    WikiPage a = make_source("A", {"P", "Q", "R"});
    std::vector<Step2Features> fs = {feat(0.9, 0.2, 0.1), feat(0.3, 0.8, 0.2),
                                     feat(0.1, 0.1, 0.9)};
    auto scorer_for = [&](double scale) {
        RankerModel m({0.5 * scale, 0.3 * scale, 0.2 * scale}, {}, 0);
        return [m, &a, &fs](const WikiPage&, const Reference& ref) {
            for (std::size_t i = 0; i < a.references.size(); ++i) {
                if (&a.references[i] == &ref) return score(m, fs[i]);
            }
            return 0.0;
        };
    };
    auto base = rank_references(target, {&a}, scorer_for(1.0), RecommendOptions{.k = 3});
    auto scaled = rank_references(target, {&a}, scorer_for(7.5), RecommendOptions{.k = 3});
    REQUIRE(base.size() == scaled.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].reference.title == scaled[i].reference.title);
        CHECK(base[i].rank == scaled[i].rank);
    }
}

TEST_CASE("model-driven recommendation scores through the feature pipeline") {
    RefLand land;
    RankerModel model({1.0, 0.0, 0.0}, {}, 0);
    auto recs = recommend(land.qt, {&land.sp}, model, land.idf, land.provider,
                          RecommendOptions{.k = 5, .exclude_existing = false});
    REQUIRE(recs.size() == 1);  // the punctuation-only second reference is unkeyed
    CHECK(recs[0].reference.title == "Gamma delta handbook");
    CHECK(recs[0].rank == 1);
    CHECK(recs[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
