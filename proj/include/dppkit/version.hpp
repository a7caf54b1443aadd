#ifndef DPPKIT_VERSION_HPP
#define DPPKIT_VERSION_HPP

#define DPPKIT_VERSION "0.1.0"

#endif
