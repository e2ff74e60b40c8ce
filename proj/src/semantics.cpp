#include "wikinav/semantics.hpp"

#include "textio.hpp"
#include "wikinav/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <random>

namespace wikinav {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2) out.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (c >= 0x80 || std::isalnum(c)) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::size_t DocumentCorpus::ensure_doc(std::string_view name) {
    const std::string key(name);
    auto [it, inserted] = doc_ids_.try_emplace(key, names_.size());
    if (inserted) {
        names_.push_back(key);
        docs_.emplace_back();
        categories_.emplace_back();
    }
    return it->second;
}

std::size_t DocumentCorpus::add_document(std::string_view name, const std::vector<std::string>& tokens) {
    const std::size_t doc = ensure_doc(name);
    std::map<std::uint32_t, std::uint32_t> counts(docs_[doc].begin(), docs_[doc].end());
    for (const auto& tok : tokens) {
        auto [it, inserted] = term_ids_.try_emplace(tok, static_cast<std::uint32_t>(terms_.size()));
        if (inserted) {
            terms_.push_back(tok);
            df_.push_back(0);
        }
        if (counts[it->second]++ == 0) ++df_[it->second];
    }
    docs_[doc].assign(counts.begin(), counts.end());
    return doc;
}

void DocumentCorpus::set_categories(std::string_view name, const std::vector<std::string>& categories) {
    const std::size_t doc = ensure_doc(name);
    auto& cats = categories_[doc];
    for (const auto& c : categories) {
        auto [it, inserted] = category_ids_.try_emplace(c, static_cast<std::uint32_t>(category_ids_.size()));
        cats.push_back(it->second);
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
}

std::optional<std::size_t> DocumentCorpus::find(std::string_view name) const {
    const auto it = doc_ids_.find(std::string(name));
    if (it == doc_ids_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> DocumentCorpus::term_id(std::string_view term) const {
    const auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t DocumentCorpus::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t d = 0; d < names_.size(); ++d) {
        mix_bytes(names_[d].data(), names_[d].size());
        for (const auto& [term, tf] : docs_[d]) {
            mix_bytes(terms_[term].data(), terms_[term].size());
            mix_bytes(&tf, sizeof tf);
        }
        const std::uint64_t ncat = categories_[d].size();
        mix_bytes(&ncat, sizeof ncat);
    }
    return h;
}

DocumentCorpus read_corpus(std::istream& tokens, std::istream* categories) {
    DocumentCorpus corpus;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(tokens, raw)) {
        ++line_no;
        const auto line = textio::strip_cr(raw);
        if (textio::is_skippable(line)) continue;
        const auto fields = textio::split(line, '\t');
        if (fields[0].empty()) throw MalformedInput("corpus line without article name", line_no);
        std::vector<std::string> toks;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            auto t = tokenize(fields[i]);
            toks.insert(toks.end(), t.begin(), t.end());
        }
        corpus.add_document(fields[0], toks);
    }
    if (categories) {
        line_no = 0;
        while (std::getline(*categories, raw)) {
            ++line_no;
            const auto line = textio::strip_cr(raw);
            if (textio::is_skippable(line)) continue;
            const auto fields = textio::split(line, '\t');
            if (fields[0].empty()) throw MalformedInput("category line without article name", line_no);
            std::vector<std::string> cats;
            for (std::size_t i = 1; i < fields.size(); ++i)
                if (!fields[i].empty()) cats.emplace_back(fields[i]);
            corpus.set_categories(fields[0], cats);
        }
    }
    return corpus;
}

double dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    auto i = a.entries.begin(), j = b.entries.begin();
    while (i != a.entries.end() && j != b.entries.end()) {
        if (i->first < j->first) {
            ++i;
        } else if (j->first < i->first) {
            ++j;
        } else {
            s += i->second * j->second;
            ++i;
            ++j;
        }
    }
    return s;
}

double cosine(const SparseVector& a, const SparseVector& b) {
    const double na = std::sqrt(dot(a, a)), nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

std::vector<SparseVector> tfidf(const DocumentCorpus& corpus) {
    const double n_docs = static_cast<double>(corpus.document_count());
    std::vector<SparseVector> out(corpus.document_count());
    for (std::size_t d = 0; d < corpus.document_count(); ++d) {
        auto& v = out[d];
        double norm2 = 0.0;
        for (const auto& [term, tf] : corpus.term_counts(d)) {
            const double idf = std::log(n_docs / corpus.document_frequency(term));
            const double w = (1.0 + std::log(static_cast<double>(tf))) * idf;
            if (w == 0.0) continue;
            v.entries.emplace_back(term, w);
            norm2 += w * w;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& e : v.entries) e.second *= inv;
        }
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

using ProjectionRow = std::vector<std::pair<std::uint32_t, double>>;

ProjectionRow projection_row(std::uint32_t source_index, std::size_t dim, std::uint64_t seed, std::size_t source_dim) {
    const double D = static_cast<double>(std::max<std::size_t>(source_dim, 1));
    const double density = 1.0 / std::sqrt(D);
    const double s = std::sqrt(std::sqrt(D));
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(source_index)));
    ProjectionRow row;
    for (std::size_t k = 0; k < dim; ++k) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u < density) row.emplace_back(static_cast<std::uint32_t>(k), (rng() & 1u) ? s : -s);
    }
    return row;
}

void accumulate_projection(const SparseVector& v, std::span<double> out, std::size_t dim, std::uint64_t seed,
                           std::size_t source_dim, std::vector<std::optional<ProjectionRow>>* cache) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (const auto& [idx, w] : v.entries) {
        ProjectionRow local;
        const ProjectionRow* row = nullptr;
        if (cache && idx < cache->size()) {
            auto& slot = (*cache)[idx];
            if (!slot) slot = projection_row(idx, dim, seed, source_dim);
            row = &*slot;
        } else {
            local = projection_row(idx, dim, seed, source_dim);
            row = &local;
        }
        for (const auto& [k, r] : *row) out[k] += w * r * scale;
    }
}

} // namespace

ProjectedVectors project(std::span<const SparseVector> vectors, std::size_t dim, std::uint64_t seed,
                         std::size_t source_dim) {
    if (dim < 1) throw PreconditionError("projection dimension must be >= 1");
    ProjectedVectors pv;
    pv.dim = dim;
    pv.seed = seed;
    pv.source_dim = source_dim;
    pv.data.assign(vectors.size() * dim, 0.0);
    std::vector<std::optional<ProjectionRow>> cache(source_dim);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        accumulate_projection(vectors[i], {pv.data.data() + i * dim, dim}, dim, seed, source_dim, &cache);
    return pv;
}

std::vector<double> project_one(const SparseVector& v, std::size_t dim, std::uint64_t seed, std::size_t source_dim) {
    if (dim < 1) throw PreconditionError("projection dimension must be >= 1");
    std::vector<double> out(dim, 0.0);
    accumulate_projection(v, out, dim, seed, source_dim, nullptr);
    return out;
}

double text_similarity(const ProjectedVectors& pv, std::size_t a, std::size_t b) {
    if (a >= pv.size() || b >= pv.size()) throw LookupError("text_similarity: unknown document index");
    const auto ra = pv.row(a), rb = pv.row(b);
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < pv.dim; ++k) {
        ab += ra[k] * rb[k];
        aa += ra[k] * ra[k];
        bb += rb[k] * rb[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return std::clamp(ab / std::sqrt(aa * bb), 0.0, 1.0);
}

double topic_similarity(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    if (a.empty() || b.empty()) return 0.0;
    std::size_t common = 0;
    auto i = a.begin(), j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            ++common;
            ++i;
            ++j;
        }
    }
    return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double topic_similarity(const DocumentCorpus& corpus, std::size_t a, std::size_t b) {
    if (a >= corpus.document_count() || b >= corpus.document_count())
        throw LookupError("topic_similarity: unknown document index");
    return topic_similarity(corpus.categories(a), corpus.categories(b));
}

namespace {
constexpr char kProjectionMagic[8] = {'W', 'N', 'P', 'R', 'O', 'J', '0', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
bool get(std::istream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}
} // namespace

void write_projection_cache(std::ostream& out, const ProjectedVectors& pv, std::uint64_t corpus_hash) {
    out.write(kProjectionMagic, sizeof kProjectionMagic);
    put(out, static_cast<std::uint64_t>(pv.dim));
    put(out, pv.seed);
    put(out, corpus_hash);
    put(out, static_cast<std::uint64_t>(pv.source_dim));
    put(out, static_cast<std::uint64_t>(pv.size()));
    out.write(reinterpret_cast<const char*>(pv.data.data()),
              static_cast<std::streamsize>(pv.data.size() * sizeof(double)));
}

std::optional<ProjectedVectors> read_projection_cache(std::istream& in, std::size_t dim, std::uint64_t seed,
                                                      std::uint64_t corpus_hash) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kProjectionMagic, sizeof magic) != 0) return std::nullopt;
    std::uint64_t d = 0, s = 0, h = 0, src = 0, n = 0;
    if (!get(in, d) || !get(in, s) || !get(in, h) || !get(in, src) || !get(in, n)) return std::nullopt;
    if (d != dim || s != seed || h != corpus_hash) return std::nullopt;
    ProjectedVectors pv;
    pv.dim = d;
    pv.seed = s;
    pv.source_dim = src;
    pv.data.resize(n * d);
    if (!in.read(reinterpret_cast<char*>(pv.data.data()), static_cast<std::streamsize>(pv.data.size() * sizeof(double))))
        return std::nullopt;
    return pv;
}

} // namespace wikinav
