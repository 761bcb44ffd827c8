#include "bridgelab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bridgelab {

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Matrix matrix_from_json(const Json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array()) throw DomainError(std::string(what) + ": expected an array");
  Matrix m(rows, cols);
  if (j.size() == static_cast<std::size_t>(rows * cols) && (j.empty() || j[0].is_number())) {
    for (Index i = 0; i < rows; ++i)
      for (Index k = 0; k < cols; ++k) m(i, k) = j.at(i * cols + k).get<double>();
    return m;
  }
  if (j.size() == static_cast<std::size_t>(rows) && (j.empty() || j[0].is_array())) {
    for (Index i = 0; i < rows; ++i) {
      if (j[i].size() != static_cast<std::size_t>(cols)) throw DomainError(std::string(what) + ": ragged rows");
      for (Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
  }
  std::ostringstream os;
  os << what << ": expected " << rows << "x" << cols << " entries";
  throw DomainError(os.str());
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw DomainError(std::string(what) + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Json discrete_model_to_json(const DiscreteModel& model) {
  return Json{{"nx", model.nx},
              {"ny", model.ny},
              {"W", matrix_to_json(model.W)},
              {"lambda", vector_to_json(model.lambda)},
              {"nu", vector_to_json(model.nu)},
              {"U", vector_to_json(model.U)},
              {"V", vector_to_json(model.V)}};
}

DiscreteModel discrete_model_from_json(const Json& j) {
  try {
    Index nx = j.at("nx").get<Index>(), ny = j.at("ny").get<Index>();
    if (nx <= 0 || ny <= 0) throw DomainError("discrete model: nx and ny must be positive");
    Matrix W = matrix_from_json(j.at("W"), nx, ny, "W");
    Vector lambda = j.contains("lambda") ? vector_from_json(j["lambda"], "lambda") : Vector::Ones(nx);
    Vector nu = j.contains("nu") ? vector_from_json(j["nu"], "nu") : Vector::Ones(ny);
    Vector U = j.contains("U") ? vector_from_json(j["U"], "U") : Vector::Zero(nx);
    Vector V = j.contains("V") ? vector_from_json(j["V"], "V") : Vector::Zero(ny);
    return build_model(W, lambda, nu, U, V);
  } catch (const Json::exception& e) {
    throw DomainError(std::string("discrete model: ") + e.what());
  }
}

Json gaussian_instance_to_json(const GaussianInstance& inst) {
  return Json{{"m", vector_to_json(inst.mu.mean)},
              {"sigma", matrix_to_json(inst.mu.cov())},
              {"m_bar", vector_to_json(inst.eta.mean)},
              {"sigma_bar", matrix_to_json(inst.eta.cov())},
              {"alpha", vector_to_json(inst.kernel.alpha)},
              {"beta", matrix_to_json(inst.kernel.beta)},
              {"tau", matrix_to_json(inst.kernel.cov())}};
}

GaussianInstance gaussian_instance_from_json(const Json& j) {
  try {
    Vector m = vector_from_json(j.at("m"), "m");
    const Index d = m.size();
    if (d == 0) throw DomainError("gaussian instance: empty mean");
    GaussianInstance inst;
    inst.mu = Gaussian(m, matrix_from_json(j.at("sigma"), d, d, "sigma"));
    inst.eta = Gaussian(vector_from_json(j.at("m_bar"), "m_bar"), matrix_from_json(j.at("sigma_bar"), d, d, "sigma_bar"));
    inst.kernel = LinearGaussianKernel(vector_from_json(j.at("alpha"), "alpha"), matrix_from_json(j.at("beta"), d, d, "beta"),
                                       matrix_from_json(j.at("tau"), d, d, "tau"));
    if (inst.eta.dim() != d || inst.kernel.dim() != d) throw DomainError("gaussian instance: dimension mismatch");
    return inst;
  } catch (const Json::exception& e) {
    throw DomainError(std::string("gaussian instance: ") + e.what());
  }
}

Json certificate_to_json(const ContractionCertificate& cert) {
  Json table = Json::array();
  for (const auto& e : cert.iota_table)
    table.push_back({{"level", e.level}, {"iota", e.iota}, {"feasible", e.feasible}, {"note", e.note}});
  return Json{{"a", cert.a},
              {"rho", cert.rho},
              {"epsilon", cert.epsilon},
              {"c", cert.c},
              {"product_lip", cert.product_lip},
              {"g", vector_to_json(cert.g)},
              {"h", vector_to_json(cert.h)},
              {"iota_table", table}};
}

ContractionCertificate certificate_from_json(const Json& j) {
  ContractionCertificate cert;
  cert.a = j.at("a").get<double>();
  cert.rho = j.at("rho").get<double>();
  cert.epsilon = j.at("epsilon").get<double>();
  cert.c = j.at("c").get<double>();
  cert.product_lip = j.value("product_lip", 0.0);
  cert.g = vector_from_json(j.at("g"), "g");
  cert.h = vector_from_json(j.at("h"), "h");
  for (const auto& e : j.value("iota_table", Json::array()))
    cert.iota_table.push_back({e.at("level").get<double>(), e.at("iota").get<double>(), e.at("feasible").get<bool>(),
                               e.value("note", std::string())});
  return cert;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string report_csv(const Report& report) {
  std::string out = "step,metric,value\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.step);
    out += ',';
    out += row.metric;
    out += ',';
    out += format_double(row.value);
    out += '\n';
  }
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DomainError("invalid JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace bridgelab
