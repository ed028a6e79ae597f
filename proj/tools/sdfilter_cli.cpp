// Copyright (C) 2026 The sdfilter Authors
// SPDX-License-Identifier: Apache-2.0

// sdfilter: command-line front end for the safety-filter toolkit.
//
// Exit codes: 0 safe / success, 1 unsafe, 2 error, 3 attack left targets unmatched.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdfilter/analysis.hpp"
#include "sdfilter/concept_store.hpp"
#include "sdfilter/embfile.hpp"
#include "sdfilter/encoders.hpp"
#include "sdfilter/errors.hpp"
#include "sdfilter/inversion.hpp"
#include "sdfilter/safety_filter.hpp"
#include "sdfilter/simd/kernels.hpp"
#include "sdfilter/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitUnsafe = 1;
constexpr int kExitError = 2;
constexpr int kExitIncomplete = 3;

struct EncoderFlags {
    std::string spec;
    std::optional<std::string> lexicon;

    std::unique_ptr<sdfilter::TextEncoder> make() const {
        std::optional<fs::path> lex;
        if (lexicon) lex = fs::path(*lexicon);
        return sdfilter::make_encoder(spec, lex);
    }
};

void add_encoder_flags(CLI::App* cmd, EncoderFlags& flags) {
    cmd->add_option("--encoder", flags.spec, "toy:<seed> or cache:<emb1-path>")->required();
    cmd->add_option("--lexicon", flags.lexicon,
                    "EMB1 file pinning single words to given vectors (toy encoder only)");
}

void add_format_flag(CLI::App* cmd, std::string& format) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
}

// Shortest decimal that reads back as the same f32.
json num(float f) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, f);
    return json(std::stod(std::string(buf, res.ptr)));
}

void emit_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw sdfilter::IoError("cannot open " + path.string());
    }
    std::vector<std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!sdfilter::text::is_valid_utf8(line)) {
            throw sdfilter::EncodingError(path.string(), line_no);
        }
        const auto t = sdfilter::text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(t);
    }
    return out;
}

// "<path>:<row>"; the row is after the last ':' so paths may contain colons.
std::pair<fs::path, std::size_t> parse_row_ref(const std::string& ref) {
    const auto colon = ref.rfind(':');
    if (colon == std::string::npos || colon + 1 == ref.size()) {
        throw sdfilter::ParameterError("--image-emb expects <emb1>:<row>, got \"" + ref + "\"");
    }
    std::size_t row = 0;
    try {
        std::size_t used = 0;
        row = std::stoul(ref.substr(colon + 1), &used);
        if (used != ref.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw sdfilter::ParameterError("row index in \"" + ref + "\" is not a number");
    }
    return {fs::path(ref.substr(0, colon)), row};
}

// ---------------------------------------------------------------------------

struct CheckArgs {
    std::string image_ref;
    std::string concepts;
    std::optional<float> adjustment;
    std::string format = "text";
};

json verdict_json(const sdfilter::FilterVerdict& v, const sdfilter::ConceptSet& set) {
    using sdfilter::ConceptGroup;
    json unsafe = json::array();
    for (std::size_t i = 0; i < v.unsafe_scores.size(); ++i) {
        const float eff = sdfilter::effective_threshold(v, set, i);
        const bool hit =
            std::find(v.triggered_concepts.begin(), v.triggered_concepts.end(), i) != v.triggered_concepts.end();
        unsafe.push_back({{"index", i},
                          {"concept", set.display_label(ConceptGroup::unsafe, i)},
                          {"score", num(v.unsafe_scores[i])},
                          {"threshold", num(set.unsafe()[i].threshold)},
                          {"effective_threshold", num(eff)},
                          {"margin", num(v.unsafe_scores[i] - eff)},
                          {"triggered", hit}});
    }
    json special = json::array();
    for (std::size_t i = 0; i < v.special_scores.size(); ++i) {
        special.push_back({{"index", i},
                           {"concept", set.display_label(ConceptGroup::special_care, i)},
                           {"score", num(v.special_scores[i])},
                           {"threshold", num(set.special_care()[i].threshold)},
                           {"margin", num(v.special_scores[i] - set.special_care()[i].threshold)},
                           {"active", static_cast<bool>(v.special_triggered[i])}});
    }
    json triggered = json::array();
    for (std::size_t i : v.triggered_concepts) {
        triggered.push_back(set.display_label(ConceptGroup::unsafe, i));
    }
    return {{"verdict", v.is_unsafe ? "UNSAFE" : "SAFE"},
            {"is_unsafe", v.is_unsafe},
            {"adjustment_applied", num(v.adjustment_applied)},
            {"triggered_concepts", triggered},
            {"unsafe", unsafe},
            {"special_care", special}};
}

int run_check(const CheckArgs& args) {
    auto set = sdfilter::load_concept_set(args.concepts);
    if (args.adjustment) {
        set = set.with_adjustment(*args.adjustment);
    }
    const auto [path, row] = parse_row_ref(args.image_ref);
    const auto file = sdfilter::load_emb(path);
    if (row >= file.size()) {
        throw sdfilter::ParameterError("row " + std::to_string(row) + " out of range (" + path.string() +
                                       " has " + std::to_string(file.size()) + " rows)");
    }
    const auto verdict = sdfilter::check_image(file.vector(row), set);
    if (args.format == "json") {
        auto j = verdict_json(verdict, set);
        j["image"] = {{"file", path.string()}, {"row", row}, {"label", file.label(row)}};
        emit_json(j);
    } else {
        std::cout << sdfilter::explain_verdict(verdict, set);
    }
    return verdict.is_unsafe ? kExitUnsafe : kExitSafe;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
    std::string targets;
    std::vector<std::string> vocab;
    EncoderFlags encoder;
    std::size_t k = sdfilter::kDefaultTopK;
    std::size_t compose = 0;
    float epsilon = sdfilter::kDefaultExactEpsilon;
    unsigned threads = 0;
    std::string format = "text";
};

int run_attack(const AttackArgs& args) {
    const auto encoder = args.encoder.make();
    const auto target_file = sdfilter::load_emb(args.targets);
    if (target_file.empty()) {
        throw sdfilter::ParameterError(args.targets + " has no target rows");
    }
    std::vector<sdfilter::EmbeddingVector> targets;
    for (std::size_t i = 0; i < target_file.size(); ++i) {
        targets.push_back(target_file.vector(i));
    }
    std::vector<fs::path> paths(args.vocab.begin(), args.vocab.end());
    const auto vocab = sdfilter::load_vocabulary(paths);

    sdfilter::AttackOptions options;
    options.k = args.k;
    options.epsilon_exact = args.epsilon;
    options.threads = args.threads;
    auto reports = args.compose > 0
                       ? sdfilter::refine_attack(targets, vocab, *encoder, args.compose, options)
                       : sdfilter::dictionary_attack(targets, vocab, *encoder, options);

    std::size_t exact = 0;
    for (const auto& r : reports) exact += r.exact_match.has_value();
    const std::size_t unmatched = reports.size() - exact;

    if (args.format == "json") {
        json jt = json::array();
        for (const auto& r : reports) {
            json top = json::array();
            for (const auto& c : r.top_k) {
                top.push_back({{"text", c.text}, {"similarity", num(c.similarity)}});
            }
            jt.push_back({{"target_index", r.target_index},
                          {"label", target_file.label(r.target_index)},
                          {"exact_match", r.exact_match ? json(*r.exact_match) : json(nullptr)},
                          {"top_k", top}});
        }
        emit_json({{"encoder", encoder->describe()},
                   {"vocabulary_size", vocab.size()},
                   {"vocabulary_sources", vocab.provenance},
                   {"k", args.k},
                   {"compose", args.compose},
                   {"epsilon_exact", num(args.epsilon)},
                   {"exact_matches", exact},
                   {"unmatched", unmatched},
                   {"targets", jt}});
    } else {
        std::printf("encoder %s, vocabulary %zu entries from %zu source(s), k=%zu, compose=%zu\n",
                    encoder->describe().c_str(), vocab.size(), vocab.provenance.size(), args.k,
                    args.compose);
        for (const auto& r : reports) {
            const auto& label = target_file.label(r.target_index);
            std::printf("\ntarget %zu (%s): ", r.target_index, label.empty() ? "<obfuscated>" : label.c_str());
            if (r.exact_match) {
                std::printf("EXACT \"%s\"\n", r.exact_match->c_str());
            } else if (r.best_similarity()) {
                std::printf("no exact match, best %.6f\n", *r.best_similarity());
            } else {
                std::printf("no candidates\n");
            }
            for (std::size_t i = 0; i < r.top_k.size(); ++i) {
                std::printf("  %3zu  %.6f  %s%s\n", i + 1, r.top_k[i].similarity, r.top_k[i].text.c_str(),
                            (i == 0 && r.exact_match) ? "  <== exact" : "");
            }
        }
        std::printf("\n%zu of %zu targets exactly matched\n", exact, reports.size());
    }
    return unmatched == 0 ? kExitSafe : kExitIncomplete;
}

// ---------------------------------------------------------------------------

struct DiluteArgs {
    std::string base;
    std::string fillers;
    std::string concepts;
    std::size_t concept_index = 0;
    std::optional<std::size_t> max;
    EncoderFlags encoder;
    std::string format = "text";
};

int run_dilute(const DiluteArgs& args) {
    const auto encoder = args.encoder.make();
    const auto set = sdfilter::load_concept_set(args.concepts);
    const auto fillers = read_lines(args.fillers);
    const auto curve = sdfilter::dilution_curve(args.base, fillers, *encoder, set, args.concept_index, args.max);
    if (args.format == "json") {
        json points = json::array();
        for (const auto& p : curve.points) {
            points.push_back({{"filler_count", p.filler_count},
                              {"text", p.text},
                              {"similarity", num(p.similarity)},
                              {"verdict", p.verdict_unsafe ? "UNSAFE" : "SAFE"}});
        }
        const auto first_safe = curve.first_safe();
        emit_json({{"base_text", curve.base_text},
                   {"concept_index", curve.concept_index},
                   {"concept", set.display_label(sdfilter::ConceptGroup::unsafe, curve.concept_index)},
                   {"threshold", num(set.unsafe()[curve.concept_index].threshold)},
                   {"encoder", encoder->describe()},
                   {"first_safe", first_safe ? json(*first_safe) : json(nullptr)},
                   {"points", points}});
    } else {
        std::cout << sdfilter::format_dilution_curve(curve, set);
    }
    return kExitSafe;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string corpus;
    std::string concepts;
    unsigned threads = 0;
    std::string format = "text";
};

json ratio_json(const sdfilter::Ratio& r) {
    const auto v = r.value();
    return {{"value", v ? num(*v) : json(nullptr)},
            {"numerator", r.numerator},
            {"denominator", r.denominator},
            {"undefined", !r.defined()}};
}

int run_eval(const EvalArgs& args) {
    const auto set = sdfilter::load_concept_set(args.concepts);
    const auto corpus = sdfilter::load_emb(args.corpus);
    const auto stats = sdfilter::eval_corpus(corpus, set, args.threads);
    if (args.format == "json") {
        json labels = json::array();
        for (std::size_t i = 0; i < set.unsafe().size(); ++i) {
            labels.push_back(set.display_label(sdfilter::ConceptGroup::unsafe, i));
        }
        json rows = json::array();
        for (const auto& r : stats.rows) {
            rows.push_back({{"id", r.id}, {"label", r.labeled_unsafe ? "unsafe" : "safe"}, {"flagged", r.flagged}});
        }
        emit_json({{"n_total", stats.n_total},
                   {"n_flagged", stats.n_flagged},
                   {"n_labeled_unsafe", stats.n_labeled_unsafe},
                   {"false_positive_rate", ratio_json(stats.false_positive_rate)},
                   {"false_negative_rate", ratio_json(stats.false_negative_rate)},
                   {"per_concept_trigger_counts", stats.per_concept_trigger_counts},
                   {"concepts", labels},
                   {"rows", rows}});
    } else {
        std::cout << sdfilter::format_corpus_stats(stats, set);
    }
    return kExitSafe;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
    std::string emb;
    std::string format = "text";
};

constexpr float kUnitTolerance = 1e-5f;

int run_inspect(const InspectArgs& args) {
    const auto file = sdfilter::load_emb(args.emb);
    std::size_t non_unit = 0;
    std::vector<float> norms(file.size());
    for (std::size_t i = 0; i < file.size(); ++i) {
        norms[i] = sdfilter::norm(file.row(i));
        non_unit += std::fabs(norms[i] - 1.0f) > kUnitTolerance;
    }
    if (args.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < file.size(); ++i) {
            rows.push_back({{"row", i},
                            {"label", file.label(i)},
                            {"obfuscated", file.label(i).empty()},
                            {"norm", num(norms[i])},
                            {"unit", std::fabs(norms[i] - 1.0f) <= kUnitTolerance}});
        }
        emit_json({{"file", args.emb},
                   {"dim", file.dim()},
                   {"row_count", file.size()},
                   {"non_unit_rows", non_unit},
                   {"rows", rows}});
    } else {
        std::printf("file  %s\ndim   %zu\nrows  %zu\n", args.emb.c_str(), file.dim(), file.size());
        if (!file.empty()) {
            std::printf("\n%6s  %-10s  %s\n", "row", "norm", "label");
        }
        for (std::size_t i = 0; i < file.size(); ++i) {
            const auto& label = file.label(i);
            std::printf("%6zu  %.6f  %s%s\n", i, norms[i], label.empty() ? "<obfuscated>" : label.c_str(),
                        std::fabs(norms[i] - 1.0f) > kUnitTolerance ? "  [non-unit]" : "");
        }
        if (non_unit > 0) {
            std::printf("\n%zu row(s) are not unit norm (tolerance %g)\n", non_unit, kUnitTolerance);
        }
    }
    return kExitSafe;
}

// ---------------------------------------------------------------------------

struct EncodeArgs {
    std::string input;
    std::string output;
    EncoderFlags encoder;
    bool obfuscate = false;
};

int run_encode(const EncodeArgs& args) {
    const auto encoder = args.encoder.make();
    const auto texts = read_lines(args.input);
    sdfilter::EmbeddingFile out(encoder->dim());
    for (const auto& t : texts) {
        out.add_row(args.obfuscate ? std::string() : t, encoder->encode(t));
    }
    sdfilter::save_emb(out, args.output);
    std::printf("wrote %zu row(s) of dim %zu to %s\n", out.size(), out.dim(), args.output.c_str());
    return kExitSafe;
}

struct FixtureArgs {
    std::string out_dir;
    EncoderFlags encoder;
};

int run_fixture(const FixtureArgs& args) {
    const auto encoder = args.encoder.make();
    const auto set = sdfilter::canonical_fixture(*encoder);
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    sdfilter::save_concept_set(set, dir / "concepts.json", dir / "concepts.emb1");
    std::printf("wrote %s and %s (%zu unsafe, %zu special-care, encoder %s)\n",
                (dir / "concepts.json").string().c_str(), (dir / "concepts.emb1").string().c_str(),
                set.unsafe().size(), set.special_care().size(), encoder->describe().c_str());
    return kExitSafe;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdfilter: embedding-space safety filter checks, dictionary attacks and dilution analysis"};
    app.require_subcommand(1);
    std::string simd;
    app.add_option("--simd", simd, "Force a kernel backend (scalar, avx2, neon)");

    CheckArgs check;
    auto* c = app.add_subcommand("check", "Classify one image embedding against a concept set");
    c->add_option("--image-emb", check.image_ref, "<emb1>:<row> image embedding")->required();
    c->add_option("--concepts", check.concepts, "Concept manifest (JSON)")->required();
    c->add_option("--adjustment", check.adjustment, "Override the manifest's special-care adjustment");
    add_format_flag(c, check.format);

    AttackArgs attack;
    auto* a = app.add_subcommand("attack", "Dictionary attack on (obfuscated) target embeddings");
    a->add_option("--targets", attack.targets, "EMB1 file of target embeddings")->required();
    a->add_option("--vocab", attack.vocab, "Wordlist file(s), one entry per line")->required()->expected(1, -1);
    add_encoder_flags(a, attack.encoder);
    a->add_option("--k", attack.k, "Candidates reported per target")->capture_default_str()->check(CLI::PositiveNumber);
    a->add_option("--compose", attack.compose, "Compose bigrams from the top-m words of unmatched targets (0 = off)")
        ->capture_default_str();
    a->add_option("--epsilon", attack.epsilon, "Exact-match tolerance on 1 - similarity")->capture_default_str();
    a->add_option("--threads", attack.threads, "Worker threads (0 = all cores)");
    add_format_flag(a, attack.format);

    DiluteArgs dilute;
    auto* d = app.add_subcommand("dilute", "Similarity of a prompt to a concept as filler words are appended");
    d->add_option("--base", dilute.base, "Base prompt")->required();
    d->add_option("--fillers", dilute.fillers, "Filler words, one per line")->required();
    d->add_option("--concepts", dilute.concepts, "Concept manifest (JSON)")->required();
    d->add_option("--concept", dilute.concept_index, "Unsafe concept index")->required();
    d->add_option("--max", dilute.max, "Maximum number of fillers");
    add_encoder_flags(d, dilute.encoder);
    add_format_flag(d, dilute.format);

    EvalArgs eval;
    auto* e = app.add_subcommand("eval", "False positive / negative rates over a labeled corpus");
    e->add_option("--corpus", eval.corpus, "EMB1 corpus with <id>:safe|unsafe row labels")->required();
    e->add_option("--concepts", eval.concepts, "Concept manifest (JSON)")->required();
    e->add_option("--threads", eval.threads, "Worker threads (0 = all cores)");
    add_format_flag(e, eval.format);

    InspectArgs inspect;
    auto* i = app.add_subcommand("inspect", "List the rows of an EMB1 file");
    i->add_option("--emb", inspect.emb, "EMB1 file")->required();
    add_format_flag(i, inspect.format);

    EncodeArgs encode;
    auto* en = app.add_subcommand("encode", "Embed a text list into an EMB1 file");
    en->add_option("--input", encode.input, "Texts, one per line")->required();
    en->add_option("--output", encode.output, "EMB1 output path")->required();
    en->add_flag("--obfuscate", encode.obfuscate, "Write empty labels");
    add_encoder_flags(en, encode.encoder);

    FixtureArgs fixture;
    auto* f = app.add_subcommand("fixture", "Write the canonical 17 + 3 concept set (EMB1 + manifest)");
    f->add_option("--out-dir", fixture.out_dir, "Output directory")->required();
    add_encoder_flags(f, fixture.encoder);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitError;
    }

    try {
        if (!simd.empty()) {
            const auto b = sdfilter::simd::parse_backend(simd);
            if (!b || !sdfilter::simd::set_active_backend(*b)) {
                throw sdfilter::ParameterError("SIMD backend \"" + simd + "\" is not available");
            }
        }
        if (c->parsed()) return run_check(check);
        if (a->parsed()) return run_attack(attack);
        if (d->parsed()) return run_dilute(dilute);
        if (e->parsed()) return run_eval(eval);
        if (i->parsed()) return run_inspect(inspect);
        if (en->parsed()) return run_encode(encode);
        if (f->parsed()) return run_fixture(fixture);
    } catch (const std::exception& ex) {
        std::cout.flush();
        std::cerr << "error: " << ex.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
