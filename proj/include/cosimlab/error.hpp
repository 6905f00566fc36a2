#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cosimlab {

/// Invalid configuration, located by config section and key when known.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string section, std::string key, const std::string& message)
        : std::invalid_argument(format(section, key, message)),
          section_(std::move(section)),
          key_(std::move(key)) {}

    explicit ConfigError(const std::string& message) : ConfigError({}, {}, message) {}

    [[nodiscard]] const std::string& section() const noexcept { return section_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    static std::string format(const std::string& section, const std::string& key, const std::string& message) {
        if (section.empty() && key.empty()) {
            return message;
        }
        std::string where = section;
        if (!key.empty()) {
            where += where.empty() ? key : "." + key;
        }
        return "[" + where + "] " + message;
    }

    std::string section_;
    std::string key_;
};

}  // namespace cosimlab
