#pragma once

#include <stdexcept>
#include <string>

namespace ymir {

// Every failure the library reports derives from Error. The category decides
// the CLI exit code (see tools/ymir_main.cpp).
enum class ErrorCategory { kUsage, kData, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define YMIR_DEFINE_ERROR(Name, Category, Prefix)                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what)                          \
        : Error(ErrorCategory::Category, std::string(Prefix) + what) {} \
  };

YMIR_DEFINE_ERROR(ParseError, kData, "parse error: ")
YMIR_DEFINE_ERROR(StructureError, kData, "structure error: ")
YMIR_DEFINE_ERROR(DataError, kData, "data error: ")
YMIR_DEFINE_ERROR(AlignmentError, kData, "alignment error: ")
YMIR_DEFINE_ERROR(SizeError, kData, "size error: ")
YMIR_DEFINE_ERROR(ShapeError, kData, "shape error: ")
YMIR_DEFINE_ERROR(FitError, kData, "fit error: ")
YMIR_DEFINE_ERROR(ContractError, kData, "contract error: ")
YMIR_DEFINE_ERROR(StreamError, kData, "stream error: ")
YMIR_DEFINE_ERROR(ManifestError, kData, "manifest error: ")
YMIR_DEFINE_ERROR(ParameterError, kUsage, "parameter error: ")
YMIR_DEFINE_ERROR(RegistryError, kUsage, "registry error: ")
YMIR_DEFINE_ERROR(NumericError, kNumeric, "numeric error: ")

#undef YMIR_DEFINE_ERROR

}  // namespace ymir
