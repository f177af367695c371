#include "hwr/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>

namespace hwr {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

} // namespace

void write_model_json(const BetaEllipticModel& model, std::ostream& out) {
  out << "{\"strokes\":[";
  for (std::size_t i = 0; i < model.strokes.size(); ++i) {
    const auto& s = model.strokes[i];
    out << (i ? ",\n" : "\n") << "  {\"t0\":" << num(s.beta.t0) << ",\"t1\":" << num(s.beta.t1)
        << ",\"p\":" << num(s.beta.p) << ",\"q\":" << num(s.beta.q) << ",\"k\":" << num(s.beta.k)
        << ",\"theta\":" << num(s.ellipse.theta) << ",\"a\":" << num(s.ellipse.a) << ",\"b\":" << num(s.ellipse.b)
        << ",\"cx\":" << num(s.ellipse.center.x()) << ",\"cy\":" << num(s.ellipse.center.y())
        << ",\"arc0\":" << num(s.arc0) << ",\"arc1\":" << num(s.arc1) << "}";
  }
  out << (model.strokes.empty() ? "" : "\n") << "]}\n";
}

void write_model_json(const BetaEllipticModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_model_json(model, out);
  if (!out) throw InvalidInput("write failed: " + path.string());
}

BetaEllipticModel read_model_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("model json: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("strokes") || !doc["strokes"].is_array())
    throw InvalidInput("model json: missing \"strokes\" array");
  BetaEllipticModel model;
  for (const auto& js : doc["strokes"]) {
    auto get = [&](const char* key) {
      if (!js.contains(key) || !js[key].is_number()) throw InvalidInput(std::string("model json: missing ") + key);
      return js[key].get<double>();
    };
    Stroke s;
    s.beta = {get("t0"), get("t1"), get("p"), get("q"), get("k")};
    s.ellipse.theta = get("theta");
    s.ellipse.a = get("a");
    s.ellipse.b = get("b");
    s.ellipse.center = {get("cx"), get("cy")};
    s.arc0 = get("arc0");
    s.arc1 = get("arc1");
    model.strokes.push_back(s);
  }
  model.validate();
  return model;
}

BetaEllipticModel read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  return read_model_json(in);
}

} // namespace hwr
