from django.contrib import admin
from django.urls import path, include
from drf_yasg.views import get_schema_view
from drf_yasg import openapi
from rest_framework import permissions
from rest_framework_simplejwt.views import TokenObtainPairView, TokenRefreshView

schema_view = get_schema_view(
    openapi.Info(
        title="DifFSS Pipeline API",
        default_version='v1',
        description="Read-only access to condition, generation, evaluation and drift provenance",
    ),
    public=True,
    permission_classes=(permissions.AllowAny,),
)

urlpatterns = [
    path('admin/', admin.site.urls),
    path('api/auth/login/', TokenObtainPairView.as_view(), name='login'),
    path('api/auth/refresh/', TokenRefreshView.as_view(), name='token_refresh'),
    path('api/conditions/', include('conditions.urls')),
    path('api/generated/', include('generation.urls')),
    path('api/reports/', include('metrics.urls')),
    path('api/drift/', include('drift_audit.urls')),
    path('api/dashboard/', include('dashboard.urls')),
    path('api/docs/', schema_view.with_ui('swagger', cache_timeout=0), name='schema-swagger-ui'),
]
