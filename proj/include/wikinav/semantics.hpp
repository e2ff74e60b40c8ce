#pragma once
// Text and category similarity between articles: sublinear tf-idf, sparse
// random projection, cosine.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wikinav {

// Lowercase, split on non-alphanumerics, drop tokens shorter than 2 bytes.
// Bytes >= 0x80 count as alphanumeric so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

class DocumentCorpus {
public:
    using TermCounts = std::vector<std::pair<std::uint32_t, std::uint32_t>>; // (term id, tf), sorted

    // Returns the document index. Adding a name twice merges into the first entry.
    std::size_t add_document(std::string_view name, const std::vector<std::string>& tokens);
    void set_categories(std::string_view name, const std::vector<std::string>& categories);

    std::size_t document_count() const { return names_.size(); }
    std::size_t vocabulary_size() const { return terms_.size(); }
    std::optional<std::size_t> find(std::string_view name) const;
    const std::string& name(std::size_t doc) const { return names_[doc]; }
    const TermCounts& term_counts(std::size_t doc) const { return docs_[doc]; }
    std::uint32_t document_frequency(std::uint32_t term) const { return df_[term]; }
    const std::vector<std::uint32_t>& categories(std::size_t doc) const { return categories_[doc]; }
    std::optional<std::uint32_t> term_id(std::string_view term) const;

    // Order-sensitive content hash; keys projection caches.
    std::uint64_t content_hash() const;

private:
    std::size_t ensure_doc(std::string_view name);

    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> doc_ids_;
    std::vector<TermCounts> docs_;
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::uint32_t> df_;
    std::vector<std::vector<std::uint32_t>> categories_; // sorted unique category ids
    std::unordered_map<std::string, std::uint32_t> category_ids_;
};

// Corpus files: "name<TAB>token<TAB>token..." per line (each field is run
// through tokenize) and "name<TAB>category<TAB>..." per line.
DocumentCorpus read_corpus(std::istream& tokens, std::istream* categories = nullptr);

struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries; // sorted by index
    bool empty() const { return entries.empty(); }
};

double dot(const SparseVector& a, const SparseVector& b);
double cosine(const SparseVector& a, const SparseVector& b);

// weight = (1 + ln tf) * ln(N / df), then L2-normalized per document.
std::vector<SparseVector> tfidf(const DocumentCorpus& corpus);

struct ProjectedVectors {
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::size_t source_dim = 0;
    std::vector<double> data; // row-major, one row of `dim` per document

    std::size_t size() const { return dim ? data.size() / dim : 0; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

// Sparse sign projection: each source dimension maps to +s / 0 / -s entries
// with nonzero density 1/sqrt(source_dim) and s = source_dim^(1/4), so columns
// have unit variance; outputs are scaled by 1/sqrt(dim). Rows are generated
// per source dimension from (seed, index), so the result is deterministic.
ProjectedVectors project(std::span<const SparseVector> vectors, std::size_t dim, std::uint64_t seed,
                         std::size_t source_dim);
std::vector<double> project_one(const SparseVector& v, std::size_t dim, std::uint64_t seed, std::size_t source_dim);

// Cosine of projected rows, clamped to [0,1]; 0 when either row is zero.
double text_similarity(const ProjectedVectors& pv, std::size_t a, std::size_t b);

// |A n B| / sqrt(|A||B|); 0 when either set is empty. Inputs sorted unique.
double topic_similarity(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
double topic_similarity(const DocumentCorpus& corpus, std::size_t a, std::size_t b);

// Binary cache of projected vectors, keyed by (dim, seed, corpus hash).
void write_projection_cache(std::ostream& out, const ProjectedVectors& pv, std::uint64_t corpus_hash);
std::optional<ProjectedVectors> read_projection_cache(std::istream& in, std::size_t dim, std::uint64_t seed,
                                                      std::uint64_t corpus_hash);

} // namespace wikinav
