#pragma once

// Umbrella header: the full stack in dependency order.

#include "adhocnet/bytes.hpp"
#include "adhocnet/error.hpp"
#include "adhocnet/rng.hpp"
#include "adhocnet/address.hpp"
#include "adhocnet/frame.hpp"
#include "adhocnet/transport.hpp"
#include "adhocnet/sim_medium.hpp"
#include "adhocnet/checksum.hpp"
#include "adhocnet/segment.hpp"
#include "adhocnet/reliable.hpp"
#include "adhocnet/crypto/types.hpp"
#include "adhocnet/crypto/primitives.hpp"
#include "adhocnet/crypto/provider.hpp"
#include "adhocnet/crypto/toy_provider.hpp"
#include "adhocnet/crypto/default_provider.hpp"
#include "adhocnet/crypto/recording_provider.hpp"
#include "adhocnet/handshake.hpp"
#include "adhocnet/channel.hpp"
#include "adhocnet/node.hpp"
#include "adhocnet/config.hpp"
#include "adhocnet/udp_medium.hpp"
#include "adhocnet/sim/trace.hpp"
#include "adhocnet/sim/knowledge.hpp"
#include "adhocnet/sim/attacker.hpp"
#include "adhocnet/sim/scenario.hpp"
#include "adhocnet/sim/simulator.hpp"
