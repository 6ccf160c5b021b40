#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "reldisc/corpus.hpp"
#include "reldisc/embedding.hpp"
#include "reldisc/error.hpp"
#include "reldisc/evaluation.hpp"
#include "reldisc/preprocess.hpp"
#include "reldisc/report.hpp"
#include "reldisc/similarity.hpp"
#include "reldisc/threshold.hpp"

namespace py = pybind11;
using namespace reldisc;

namespace {

std::vector<PreparedDoc> docs_from(const std::vector<std::tuple<DiscussionId, std::string, std::string>>& rows) {
    std::vector<PreparedDoc> docs;
    docs.reserve(rows.size());
    for (const auto& [id, created_at, text] : rows) docs.push_back({id, "", parse_timestamp(created_at), text});
    return docs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Related-discussion detection: preprocessing, similarity, local thresholds and precision";
    m.attr("__version__") = tool_version();

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<ProviderError>(m, "ProviderError", base.ptr());

    // Text pipeline
    m.def("strip_code_and_urls", &strip_code_and_urls, py::arg("text"));
    m.def("strip_noise", &strip_noise, py::arg("text"));
    m.def("normalize", &normalize, py::arg("text"));
    m.def("lemmatize", &lemmatize, py::arg("token"));
    m.def(
        "prepare_text",
        [](const std::string& title, const std::string& body) -> std::optional<std::string> {
            Discussion d;
            d.id = 1;
            d.title = title;
            d.body = body;
            const auto doc = prepare(d);
            if (!doc) return std::nullopt;
            return doc->text;
        },
        py::arg("title"), py::arg("body"),
        "Cleaned text of one post, or None when nothing survives preprocessing.");

    // Embedding and similarity
    m.def("hash_embed", [](const std::string& text, std::size_t dim) { return hash_embed(text, dim).values; },
          py::arg("text"), py::arg("dim") = 768);
    m.def(
        "cosine", [](const std::vector<double>& a, const std::vector<double>& b) { return cosine({a}, {b}); },
        py::arg("a"), py::arg("b"));

    py::class_<SimilarityRecord>(m, "SimilarityRecord")
        .def(py::init<>())
        .def(py::init([](DiscussionId m_id, DiscussionId t_id, double v) { return SimilarityRecord{m_id, t_id, v}; }),
             py::arg("master_id"), py::arg("target_id"), py::arg("value"))
        .def_readwrite("master_id", &SimilarityRecord::master_id)
        .def_readwrite("target_id", &SimilarityRecord::target_id)
        .def_readwrite("value", &SimilarityRecord::value)
        .def("__eq__", [](const SimilarityRecord& a, const SimilarityRecord& b) { return a == b; })
        .def("__repr__", [](const SimilarityRecord& r) {
            return "SimilarityRecord(" + std::to_string(r.master_id) + ", " + std::to_string(r.target_id) + ", " +
                   format_exact(r.value) + ")";
        });

    m.def(
        "pairwise_hash",
        [](const std::vector<std::tuple<DiscussionId, std::string, std::string>>& rows, std::size_t dim,
           unsigned threads) {
            const auto docs = docs_from(rows);
            ProviderConfig provider;
            provider.dim = dim;
            py::gil_scoped_release release;
            return pairwise(docs, embed_batch(provider, docs), threads);
        },
        py::arg("docs"), py::arg("dim") = 768, py::arg("threads") = 1,
        "All pair similarities of (id, created_at, text) rows under the hash provider.");

    // Threshold
    py::class_<ThresholdStats>(m, "ThresholdStats")
        .def_readonly("k", &ThresholdStats::k)
        .def_readonly("size_s", &ThresholdStats::size_s)
        .def_readonly("q1", &ThresholdStats::q1)
        .def_readonly("q2", &ThresholdStats::q2)
        .def_readonly("q3", &ThresholdStats::q3)
        .def_readonly("iqr", &ThresholdStats::iqr)
        .def_readonly("t_related", &ThresholdStats::t_related)
        .def_property_readonly("degenerate", &ThresholdStats::degenerate)
        .def("__repr__", [](const ThresholdStats& s) {
            return "ThresholdStats(k=" + std::to_string(s.k) + ", size_s=" + std::to_string(s.size_s) +
                   ", q1=" + format_fixed4(s.q1) + ", q3=" + format_fixed4(s.q3) +
                   ", t_related=" + format_fixed4(s.t_related) + ")";
        });

    m.def(
        "percentile", [](std::vector<double> values, double q) { return percentile(values, q); },
        py::arg("sorted_values"), py::arg("q"));
    m.def(
        "local_threshold", [](std::vector<double> s) { return local_threshold(s); }, py::arg("s"));
    m.def("build_s", &build_s, py::arg("records"), py::arg("k"));
    m.def(
        "top_k",
        [](const std::vector<SimilarityRecord>& records, std::size_t k) {
            std::vector<std::pair<DiscussionId, DiscussionId>> out;
            for (const auto& key : top_k(records, k)) out.emplace_back(key.master_id, key.target_id);
            return out;
        },
        py::arg("records"), py::arg("k"));
    m.def("compute_threshold", &compute_threshold, py::arg("records"), py::arg("k"));

    // Evaluation
    py::enum_<Label>(m, "Label").value("D", Label::D).value("R", Label::R).value("N", Label::N);
    m.def("cohen_kappa", &cohen_kappa, py::arg("a"), py::arg("b"));
    m.def("mean_precision", py::overload_cast<const std::vector<double>&>(&mean_precision), py::arg("precisions"));
    m.def("format_percent", &format_percent, py::arg("fraction"));
    m.def(
        "evaluate",
        [](const std::filesystem::path& report, const std::filesystem::path& judgments,
           const std::string& denominator) {
            const auto r = load_report(report);
            return metrics_json(precision(r.keys(), load_judgments(judgments), parse_denominator(denominator)));
        },
        py::arg("report"), py::arg("judgments"), py::arg("denominator") = "all",
        "Metrics JSON, identical to the evaluate command's output.");

    // End-to-end
    m.def(
        "run",
        [](const std::filesystem::path& corpus, const std::filesystem::path& out, std::size_t k,
           std::optional<std::string> project, const std::string& category, const std::string& provider,
           std::size_t dim, const std::string& endpoint, unsigned threads) {
            RunConfig c;
            c.corpus_path = corpus;
            c.output_path = out;
            c.k = k;
            c.project = std::move(project);
            c.category = category;
            c.provider.kind = parse_provider_kind(provider);
            c.provider.dim = dim;
            c.provider.endpoint = endpoint;
            c.threads = threads;
            py::gil_scoped_release release;
            return to_json(run(c));
        },
        py::arg("corpus"), py::arg("out"), py::arg("k") = 5, py::arg("project") = py::none(),
        py::arg("category") = "all", py::arg("provider") = "hash", py::arg("dim") = 768, py::arg("endpoint") = "",
        py::arg("threads") = 1, "Runs one configuration group and returns the report JSON.");
    m.def(
        "validate_report", [](const std::string& text) { return schema_errors(text); }, py::arg("json_text"));
}
