#pragma once

#include "mrfe/precision.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mrfe::inline MRFE_PRECISION {

/// A hand-written instruction pattern. `prefix` is the domain directive
/// placed before the review; `connector` joins a response to its rationale.
struct InstructionTemplate {
    std::string pattern_id;
    std::string domain;
    std::string prefix;
    std::optional<std::string> response;
    std::optional<std::string> identifier;
    std::string connector = "because";
};

/// Renders the instruction-augmented text for review `x`.
///
/// Layout: [directive] [context] Review: x [Comment: r connector "i" expresses strong sentiment.]
/// The review is quoted only when a comment follows. Explicit `response` /
/// `identifier` arguments take precedence over the template's own slots.
/// Throws InputError when `x` is blank.
std::string apply_instruction(std::string_view x, const std::optional<std::string>& context,
                              const InstructionTemplate& tmpl,
                              const std::optional<std::string>& response = std::nullopt,
                              const std::optional<std::string>& identifier = std::nullopt);

class TemplateRegistry {
public:
    // Throws RegistryError on a duplicate pattern_id.
    const InstructionTemplate& add(InstructionTemplate tmpl);

    const InstructionTemplate& by_id(const std::string& pattern_id) const;
    std::vector<const InstructionTemplate*> by_domain(const std::string& domain) const;
    bool contains(const std::string& pattern_id) const;
    std::size_t size() const noexcept { return templates_.size(); }
    const std::vector<InstructionTemplate>& all() const noexcept { return templates_; }

    // movie, restaurant, tweet and product directives plus a directive-free "plain" pattern.
    static TemplateRegistry builtin();

private:
    std::vector<InstructionTemplate> templates_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// Records of key=value lines (pattern_id, domain, prefix, connector); a new
// record starts at each pattern_id key. '#' starts a comment line.
std::vector<InstructionTemplate> parse_templates(std::istream& in);
std::vector<InstructionTemplate> load_templates(const std::filesystem::path& path);
void write_templates(std::ostream& out, const std::vector<InstructionTemplate>& templates);

std::string domain_directive(const std::string& domain);

} // namespace mrfe
