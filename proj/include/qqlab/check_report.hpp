#ifndef QQLAB_CHECK_REPORT_HPP_
#define QQLAB_CHECK_REPORT_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

namespace qqlab {

/// Where a reference value comes from: a statement of the source analysis,
/// a trivial identity, or an independent computation.
enum class Provenance { Paper, Trivial, Derived };

inline const char *to_string(Provenance p) {
  switch (p) {
  case Provenance::Paper:
    return "PAPER";
  case Provenance::Trivial:
    return "TRIVIAL";
  case Provenance::Derived:
    return "DERIVED";
  }
  return "?";
}

/// How value is compared with reference.
enum class Relation {
  Near,      // |value - reference| <= tolerance
  AtMost,    // value <= reference + tolerance
  AtLeast,   // value >= reference - tolerance
  Identical  // exact equality of the textual form (rationals)
};

inline const char *to_string(Relation r) {
  switch (r) {
  case Relation::Near:
    return "near";
  case Relation::AtMost:
    return "at_most";
  case Relation::AtLeast:
    return "at_least";
  case Relation::Identical:
    return "identical";
  }
  return "?";
}

using ReportValue = std::variant<double, std::string>;

/// One validation result. `pass` is always recomputed from the other fields.
struct CheckReport {
  std::string name;
  ReportValue value = 0.0;
  ReportValue reference = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::Near;
  Provenance provenance = Provenance::Derived;
  bool pass = false;
  std::string note;

  static bool evaluate(const ReportValue &value, const ReportValue &reference,
                       double tolerance, Relation relation) {
    if (relation == Relation::Identical) {
      return value == reference;
    }
    if (std::holds_alternative<std::string>(value) ||
        std::holds_alternative<std::string>(reference)) {
      return evaluate_exact(value, reference, tolerance, relation);
    }
    const auto *v = std::get_if<double>(&value);
    const auto *r = std::get_if<double>(&reference);
    if (!v || !r || std::isnan(*v) || std::isnan(*r)) {
      return false;
    }
    switch (relation) {
    case Relation::Near:
      return std::abs(*v - *r) <= tolerance;
    case Relation::AtMost:
      return *v <= *r + tolerance;
    case Relation::AtLeast:
      return *v >= *r - tolerance;
    default:
      return false;
    }
  }

  /// Rationals written as "p/q" (or integers) compare exactly.
  static std::optional<boost::multiprecision::cpp_rational>
  parse_rational(const ReportValue &v) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    try {
      if (const auto *d = std::get_if<double>(&v)) {
        if (!std::isfinite(*d)) {
          return std::nullopt;
        }
        return cpp_rational(*d);
      }
      const auto &text = std::get<std::string>(v);
      const auto slash = text.find('/');
      if (slash == std::string::npos) {
        return cpp_rational(cpp_int(text));
      }
      return cpp_rational(cpp_int(text.substr(0, slash)),
                          cpp_int(text.substr(slash + 1)));
    } catch (const std::exception &) {
      return std::nullopt;
    }
  }

  static bool evaluate_exact(const ReportValue &value,
                             const ReportValue &reference, double tolerance,
                             Relation relation) {
    const auto v = parse_rational(value);
    const auto r = parse_rational(reference);
    if (!v || !r) {
      return false;
    }
    const boost::multiprecision::cpp_rational tol(tolerance);
    switch (relation) {
    case Relation::Near:
      return abs(*v - *r) <= tol;
    case Relation::AtMost:
      return *v <= *r + tol;
    case Relation::AtLeast:
      return *v >= *r - tol;
    default:
      return false;
    }
  }

  static CheckReport make(std::string name, ReportValue value,
                          ReportValue reference, double tolerance,
                          Relation relation, Provenance provenance,
                          std::string note = {}) {
    CheckReport r{std::move(name), std::move(value), std::move(reference),
                  tolerance,       relation,         provenance,
                  false,           std::move(note)};
    r.pass = evaluate(r.value, r.reference, r.tolerance, r.relation);
    return r;
  }
};

} // namespace qqlab

#endif // QQLAB_CHECK_REPORT_HPP_
