#pragma once

#include <stdexcept>
#include <string>

namespace blocka2a {

// One exception class per failure category referenced by the module contracts.
// Contract handlers throw these; the ledger turns them into error receipts.

struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct KeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DuplicateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AuthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DispatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct QuorumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SybilError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AttestationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RelayError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DisclosureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TransitionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HaltError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PolicyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FinalityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SignatureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MembershipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParticipantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ProvenanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PredicateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace blocka2a
