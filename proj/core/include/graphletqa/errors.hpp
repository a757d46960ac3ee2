#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphletqa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A row or record in an input file does not match its declared format.
class ParseError : public Error {
 public:
  ParseError(std::filesystem::path path, std::size_t line, const std::string& message);

  const std::filesystem::path& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::filesystem::path path_;
  std::size_t line_;
};

/// Edges reference node ids that were never declared.
class ReferentialError : public Error {
 public:
  explicit ReferentialError(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

class DuplicateIdError : public Error {
 public:
  DuplicateIdError(std::string what_kind, std::string id);
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PathError : public Error {
 public:
  PathError(std::filesystem::path path, const std::string& message);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Raised for inputs that cannot be classified into a graphlet shape.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

class SerializationError : public Error {
 public:
  using Error::Error;
};

/// Prompt templates referenced placeholders that could not be substituted.
class AssemblyError : public Error {
 public:
  explicit AssemblyError(std::vector<std::string> placeholders);
  const std::vector<std::string>& placeholders() const noexcept { return placeholders_; }

 private:
  std::vector<std::string> placeholders_;
};

/// The endpoint could not be reached, or kept failing after all retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The endpoint answered with a status that must not be retried.
class HttpStatusError : public Error {
 public:
  HttpStatusError(int status, const std::string& message);
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphletqa
