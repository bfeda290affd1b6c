#pragma once

#define PULSEFORGE_VERSION "0.1.0"
