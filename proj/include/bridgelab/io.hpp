#pragma once

#include "bridgelab/contraction.hpp"
#include "bridgelab/discrete.hpp"
#include "bridgelab/gaussian.hpp"
#include "bridgelab/report.hpp"

#include <json.hpp>

#include <string>

namespace bridgelab {

using Json = nlohmann::json;

struct GaussianInstance {
  Gaussian mu;
  Gaussian eta;
  LinearGaussianKernel kernel;
};

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, Index rows, Index cols, const char* what);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const char* what);

/// {nx, ny, W (row-major), lambda, nu, U, V}
Json discrete_model_to_json(const DiscreteModel& model);
DiscreteModel discrete_model_from_json(const Json& j);

/// {m, sigma, m_bar, sigma_bar, alpha, beta, tau}, matrices row-major
Json gaussian_instance_to_json(const GaussianInstance& inst);
GaussianInstance gaussian_instance_from_json(const Json& j);

Json certificate_to_json(const ContractionCertificate& cert);
ContractionCertificate certificate_from_json(const Json& j);

/// Shortest text that round-trips the double; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

/// step,metric,value
std::string report_csv(const Report& report);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace bridgelab
