// Microbenchmarks over synthetic inputs sized like the bundled corpora.
// Everything is generated in-process so the suite runs from any directory.

#include <benchmark/benchmark.h>

#include <array>
#include <string>
#include <vector>

#include "wikiref/corpus.hpp"
#include "wikiref/evaluate.hpp"
#include "wikiref/rng.hpp"
#include "wikiref/step1.hpp"
#include "wikiref/step2.hpp"
#include "wikiref/textsim.hpp"

namespace {

using namespace wikiref;

std::vector<std::string> word_pool() {
    std::vector<std::string> pool;
    for (int i = 0; i < 200; ++i) pool.push_back("token" + std::to_string(i));
    return pool;
}

std::string synthetic_text(Rng& rng, const std::vector<std::string>& pool, std::size_t words) {
    std::string text;
    for (std::size_t i = 0; i < words; ++i) {
        if (!text.empty()) text.push_back(' ');
        text += pool[rng.next_index(pool.size())];
        if (i % 9 == 8) text.push_back('.');
    }
    return text;
}

struct TextFixture {
    std::vector<std::string> pool = word_pool();
    std::string text_a;
    std::string text_b;
    IdfTable idf;
    EmbeddingProvider provider{"bench", 24};

    TextFixture() {
        Rng rng(stage_seed(1, "bench-text"));
        text_a = synthetic_text(rng, pool, 400);
        text_b = synthetic_text(rng, pool, 400);
        std::vector<std::vector<std::string>> docs;
        for (int d = 0; d < 50; ++d) {
            docs.push_back(tokenize(synthetic_text(rng, pool, 120)));
        }
        idf = fit_idf(docs);
        for (const auto& word : pool) {
            DenseVector v;
            for (int i = 0; i < 24; ++i) v.values.push_back(2.0 * rng.next_unit() - 1.0);
            provider.insert(word, std::move(v));
        }
    }
};

const TextFixture& text_fixture() {
    static const TextFixture fixture;
    return fixture;
}

void BM_Tokenize(benchmark::State& state) {
    const auto& f = text_fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(tokenize(f.text_a));
    }
}
BENCHMARK(BM_Tokenize);

void BM_TfidfCosine(benchmark::State& state) {
    const auto& f = text_fixture();
    for (auto _ : state) {
        auto u = tfidf_vector(tokenize(f.text_a), f.idf);
        auto v = tfidf_vector(tokenize(f.text_b), f.idf);
        benchmark::DoNotOptimize(cosine(u, v));
    }
}
BENCHMARK(BM_TfidfCosine);

void BM_EmbeddingCosine(benchmark::State& state) {
    const auto& f = text_fixture();
    for (auto _ : state) {
        auto u = embed_text(f.text_a, f.provider);
        auto v = embed_text(f.text_b, f.provider);
        benchmark::DoNotOptimize(cosine(u, v));
    }
}
BENCHMARK(BM_EmbeddingCosine);

Step1Features example_features(Rng& rng, double center) {
    std::array<double, 8> v{};
    for (double& x : v) {
        x = center + 0.1 * rng.next_gaussian();
        x = x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
    }
    Step1Features f;
    f.tis = v[0];
    f.os = v[1];
    f.is = v[2];
    f.oss = v[3];
    f.iss = v[4];
    f.vs = v[5];
    f.osvs = v[6];
    f.isvs = v[7];
    return f;
}

std::vector<LabeledExample> synthetic_examples(std::size_t majority, std::size_t minority) {
    Rng rng(stage_seed(2, "bench-examples"));
    std::vector<LabeledExample> examples;
    for (std::size_t i = 0; i < majority; ++i) {
        LabeledExample ex;
        ex.features = example_features(rng, 0.35);
        ex.label = Relevance::irrelevant;
        examples.push_back(std::move(ex));
    }
    for (std::size_t i = 0; i < minority; ++i) {
        LabeledExample ex;
        ex.features = example_features(rng, 0.65);
        ex.label = Relevance::relevant;
        examples.push_back(std::move(ex));
    }
    rng.shuffle(examples);
    return examples;
}

void BM_EnnUndersample(benchmark::State& state) {
    auto examples = synthetic_examples(270, 30);
    for (auto _ : state) {
        benchmark::DoNotOptimize(enn_undersample(examples));
    }
}
BENCHMARK(BM_EnnUndersample);

void BM_ChiSquareRank(benchmark::State& state) {
    auto examples = synthetic_examples(150, 150);
    for (auto _ : state) {
        benchmark::DoNotOptimize(chi_square_rank(examples, 10));
    }
}
BENCHMARK(BM_ChiSquareRank);

void BM_TrainForest(benchmark::State& state) {
    auto examples = synthetic_examples(150, 150);
    ForestParams params;
    params.tree_count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_forest(examples, params, 7));
    }
}
BENCHMARK(BM_TrainForest)->Arg(10)->Arg(100);

void BM_ForestClassify(benchmark::State& state) {
    auto examples = synthetic_examples(150, 150);
    ForestParams params;
    auto model = train_forest(examples, params, 7);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify(model, examples[i % examples.size()].features));
        ++i;
    }
}
BENCHMARK(BM_ForestClassify);

std::vector<PairDiff> synthetic_pairs(std::size_t count) {
    Rng rng(stage_seed(3, "bench-pairs"));
    std::vector<PairDiff> pairs;
    for (std::size_t i = 0; i < count; ++i) {
        PairDiff d{};
        for (double& x : d) x = 2.0 * rng.next_unit() - 1.0;
        if (d[0] < 0.0) {
            for (double& x : d) x = -x;
        }
        pairs.push_back(d);
    }
    return pairs;
}

void BM_TrainRanker(benchmark::State& state) {
    auto pairs = synthetic_pairs(500);
    RankerParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_ranker(pairs, params, 11));
    }
}
BENCHMARK(BM_TrainRanker);

struct PoolFixture {
    Corpus corpus;
    std::vector<const WikiPage*> links;
    const WikiPage* target = nullptr;

    PoolFixture() {
        Rng rng(stage_seed(4, "bench-pool"));
        auto pool = word_pool();
        {
            WikiPage page;
            page.title = "Target";
            page.sentences.push_back(synthetic_text(rng, pool, 30));
            page.summary = page.sentences.front();
            for (int l = 0; l < 50; ++l) {
                WikilinkMention m;
                m.target_title = "Linked " + std::to_string(l);
                m.sentence_index = 0;
                page.wikilinks.push_back(std::move(m));
            }
            corpus.add(std::move(page));
        }
        for (int l = 0; l < 50; ++l) {
            WikiPage page;
            page.title = "Linked " + std::to_string(l);
            page.sentences.push_back(synthetic_text(rng, pool, 30));
            page.summary = page.sentences.front();
            for (int r = 0; r < 5; ++r) {
                Reference ref;
                ref.title = "citation " + std::to_string(rng.next_index(120));
                ref.raw = ref.title;
                ref.norm_key = normalize_ref_title(ref.title);
                ref.sentence_index = 0;
                page.references.push_back(std::move(ref));
            }
            corpus.add(std::move(page));
        }
        target = &corpus.at("Target");
        for (int l = 0; l < 50; ++l) links.push_back(&corpus.at("Linked " + std::to_string(l)));
    }
};

void BM_RankReferences(benchmark::State& state) {
    static const PoolFixture fixture;
    RecommendOptions options;
    options.k = 10;
    options.exclude_existing = false;
    auto scorer = [](const WikiPage& source, const Reference& ref) {
        return static_cast<double>(ref.title.size() % 17) +
               static_cast<double>(source.title.size());
    };
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            rank_references(*fixture.target, fixture.links, scorer, options));
    }
}
BENCHMARK(BM_RankReferences);

void BM_BuildContext(benchmark::State& state) {
    static const PoolFixture fixture;
    EmbeddingProvider provider("bench", 24);
    {
        Rng rng(stage_seed(5, "bench-ctx"));
        for (const auto& word : word_pool()) {
            DenseVector v;
            for (int i = 0; i < 24; ++i) v.values.push_back(2.0 * rng.next_unit() - 1.0);
            provider.insert(word, std::move(v));
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_context(fixture.corpus, provider));
    }
}
BENCHMARK(BM_BuildContext);

}  // namespace

BENCHMARK_MAIN();
