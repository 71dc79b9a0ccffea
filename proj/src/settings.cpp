#include "hybridlink/settings.hpp"

#include "hybridlink/errors.hpp"

namespace hybridlink {

std::string_view to_string(RamanConvention c) {
  return c == RamanConvention::as_printed ? "as-printed" : "photon-conserving";
}

std::string_view to_string(SpanMode m) {
  return m == SpanMode::chain ? "chain" : "single-span-reuse";
}

std::string_view to_string(AccumulationMode m) {
  return m == AccumulationMode::incoherent ? "incoherent" : "coherent-epsilon";
}

std::string_view to_string(Fidelity f) { return f == Fidelity::fast ? "fast" : "reference"; }

RamanConvention parse_raman_convention(std::string_view s) {
  if (s == "as-printed") return RamanConvention::as_printed;
  if (s == "photon-conserving") return RamanConvention::photon_conserving;
  throw ValidationError("solver.raman_convention: expected as-printed|photon-conserving, got '" +
                        std::string(s) + "'");
}

SpanMode parse_span_mode(std::string_view s) {
  if (s == "chain") return SpanMode::chain;
  if (s == "single-span-reuse") return SpanMode::single_span_reuse;
  throw ValidationError("solver.span_mode: expected chain|single-span-reuse, got '" +
                        std::string(s) + "'");
}

AccumulationMode parse_accumulation_mode(std::string_view s) {
  if (s == "incoherent") return AccumulationMode::incoherent;
  if (s == "coherent-epsilon") return AccumulationMode::coherent_epsilon;
  throw ValidationError("nli.accumulation: expected incoherent|coherent-epsilon, got '" +
                        std::string(s) + "'");
}

Fidelity parse_fidelity(std::string_view s) {
  if (s == "fast") return Fidelity::fast;
  if (s == "reference") return Fidelity::reference;
  throw ValidationError("fidelity: expected fast|reference, got '" + std::string(s) + "'");
}

}  // namespace hybridlink
