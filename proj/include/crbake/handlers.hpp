#pragma once

#include <memory>

#include "crbake/registry.hpp"

namespace crbake {

std::shared_ptr<FormatHandler> make_fhir_handler();
std::shared_ptr<FormatHandler> make_json_handler();
std::shared_ptr<FormatHandler> make_tabular_handler();
std::shared_ptr<FormatHandler> make_parquet_handler();
std::shared_ptr<FormatHandler> make_wfdb_handler();
std::shared_ptr<FormatHandler> make_image_handler();
std::shared_ptr<FormatHandler> make_dicom_handler();
std::shared_ptr<FormatHandler> make_nifti_handler();

}  // namespace crbake
