//  This source code is licensed under the Apache 2.0 License
//  (found in the LICENSE file in the root directory).

// Python bindings. Reports and measurements cross the boundary as JSON
// strings and are decoded by the pure Python wrapper.

#include "ribbon/balanced.hpp"
#include "ribbon/filter.hpp"
#include "ribbon/key_hash.hpp"
#include "ribbon/measure.hpp"
#include "ribbon/serialization.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace ribbon;

namespace {

std::pair<Filter, std::string> build(const std::vector<KeyHash>& keys, const std::string& variant,
                                     unsigned w, double r, std::optional<double> epsilon,
                                     std::optional<unsigned> smash, std::uint64_t seed,
                                     unsigned max_retries, bool column_major) {
  BuildOptions opts;
  opts.w = w;
  opts.r = r;
  opts.epsilon = epsilon;
  opts.smash = smash;
  opts.seed = seed;
  opts.max_retries = max_retries;
  opts.layout = column_major ? Layout::kColumnMajor : Layout::kInterleaved;
  py::gil_scoped_release release;
  auto built = build_filter(parse_variant(variant), keys, opts);
  return {std::move(built.filter), built.report.to_json()};
}

py::bytes to_bytes(const Filter& f) {
  const auto bytes = serialize(f, kKeyHashFnv1aFmix64);
  return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

Filter from_bytes(py::bytes data) {
  const std::string_view view = data;
  std::uint16_t hash_id = 0;
  Filter f = deserialize(
      std::span(reinterpret_cast<const std::uint8_t*>(view.data()), view.size()), &hash_id);
  if (hash_id != kKeyHashFnv1aFmix64) {
    throw FormatError("unsupported key hash id " + std::to_string(hash_id), 0);
  }
  return f;
}

}  // namespace

PYBIND11_MODULE(_ribbon, m) {
  m.doc() = "Ribbon filter core";

  py::register_exception<ConstructionFailed>(m, "ConstructionFailed", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<Filter>(m, "Filter")
      .def("contains_hash", &Filter::contains, py::arg("key_hash"))
      .def("contains_hashes",
           [](const Filter& f, const std::vector<KeyHash>& hashes) {
             std::vector<bool> out;
             out.reserve(hashes.size());
             for (KeyHash h : hashes) out.push_back(f.contains(h));
             return out;
           })
      .def_property_readonly("variant",
                             [](const Filter& f) { return std::string(to_string(f.config().variant)); })
      .def_property_readonly("w", [](const Filter& f) { return f.config().w; })
      .def_property_readonly("num_keys", &Filter::num_keys)
      .def_property_readonly("total_bits", &Filter::total_bits)
      .def_property_readonly("bits_per_key", &Filter::bits_per_key)
      .def("drop_columns", &Filter::drop_columns, py::arg("k"))
      .def("serialize", &to_bytes)
      .def_static("deserialize", &from_bytes, py::arg("data"))
      .def("__eq__", [](const Filter& a, const Filter& b) { return a == b; });

  m.def("hash_key", [](std::string_view key) { return hash_key(key); }, py::arg("key"));
  m.def("build", &build, py::arg("keys"), py::arg("variant"), py::arg("w"), py::arg("r"),
        py::arg("epsilon"), py::arg("smash"), py::arg("seed"), py::arg("max_retries"),
        py::arg("column_major"));
  m.def(
      "fpr",
      [](const Filter& f, std::uint64_t trials, std::uint64_t seed) {
        py::gil_scoped_release release;
        return measure_fpr(f, trials, seed).to_json("fp_rate");
      },
      py::arg("filter"), py::arg("trials"), py::arg("seed"));
  m.def(
      "failure_rate",
      [](unsigned w, std::size_t rows, double epsilon, unsigned smash, unsigned r,
         std::uint64_t trials, std::uint64_t seed) {
        FailureRateParams p;
        p.w = w;
        p.m = rows;
        p.epsilon = epsilon;
        p.smash = smash;
        p.r = r;
        p.trials = trials;
        p.seed = seed;
        py::gil_scoped_release release;
        return construction_failure_rate(p).to_json("failure_rate");
      },
      py::arg("w"), py::arg("m"), py::arg("epsilon"), py::arg("smash"), py::arg("r"),
      py::arg("trials"), py::arg("seed"));
  m.def(
      "add_till_failure",
      [](unsigned w, std::size_t rows, unsigned smash, unsigned r, std::uint64_t trials,
         std::uint64_t seed) {
        AddTillFailureParams p;
        p.w = w;
        p.m = rows;
        p.smash = smash;
        p.r = r;
        p.trials = trials;
        p.seed = seed;
        py::gil_scoped_release release;
        return add_till_failure(p).to_json();
      },
      py::arg("w"), py::arg("m"), py::arg("smash"), py::arg("r"), py::arg("trials"),
      py::arg("seed"));
  m.def("recommended_epsilon", &recommended_epsilon, py::arg("r"), py::arg("w"));
  m.def("space_overhead", &space_overhead, py::arg("bits_per_key"), py::arg("fp_rate"));
}
